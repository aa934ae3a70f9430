//! Classical limits of the kicked tops and their Lyapunov exponents.
//!
//! Rescaling the collective spin to the unit sphere, `p = ⟨J⟩/j`, turns
//! each Floquet factor into a sphere map in the limit `N → ∞`:
//!
//! - a linear kick `exp(−i a J_x)` becomes the rigid rotation
//!   `R_x(a)`,
//! - a torsion `exp(−i (c/N) J_z²)` becomes the twist
//!   `p ↦ R_z(c p_z) p`, a rotation whose angle is the axis component
//!   itself.
//!
//! One kick of the quantum top is the composition of these maps, in the
//! same order the factors act on states. The largest Lyapunov exponent
//! of the composition (per kick, natural log) is computed with the
//! standard tangent-vector renormalization; tangent dynamics are kept
//! in the tangent plane of the sphere, so the trivial radial direction
//! cannot contaminate the growth rate. Chaotic-sea exponents are
//! reported as the median over an ensemble of random starting points,
//! which is robust against the occasional stable island.
//!
//! The phase-diagram scan pairs this classical diagnostic with the
//! quantum saturation ratio `F̄/F_pred` cell by cell, the two maps the
//! chaos-to-saturation correspondence is judged by.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{time_averaged_qfi, AveragingWindow, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::models;
use crate::predict;
use crate::spin::{coherent_spin_state, collective_op, Axis, Representation};

type Vec3 = [f64; 3];
type Mat3 = [[f64; 3]; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: Vec3) -> Option<Vec3> {
    let n = norm(a);
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    Some([a[0] / n, a[1] / n, a[2] / n])
}

fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// One primitive sphere map step: the new point and the Jacobian at the
/// starting point. `kappa = 0` is a rigid rotation by `alpha0`; otherwise
/// the rotation angle is `alpha0 + kappa * p_axis` (torsion).
fn sphere_step(axis: usize, alpha0: f64, kappa: f64, p: Vec3) -> (Vec3, Mat3) {
    let w = axis;
    let u = (axis + 1) % 3;
    let v = (axis + 2) % 3;
    let alpha = alpha0 + kappa * p[w];
    let (sin, cos) = alpha.sin_cos();

    let mut out = [0.0; 3];
    out[u] = p[u] * cos - p[v] * sin;
    out[v] = p[u] * sin + p[v] * cos;
    out[w] = p[w];

    let mut jac = [[0.0; 3]; 3];
    jac[u][u] = cos;
    jac[u][v] = -sin;
    jac[u][w] = kappa * (-p[u] * sin - p[v] * cos);
    jac[v][u] = sin;
    jac[v][v] = cos;
    jac[v][w] = kappa * (p[u] * cos - p[v] * sin);
    jac[w][w] = 1.0;
    (out, jac)
}

/// A map of the unit sphere with tangent (Jacobian) information.
pub trait SphereMap: Sync {
    /// Applies one iteration, returning the image point and the
    /// Jacobian evaluated at the starting point.
    fn step(&self, p: Vec3) -> (Vec3, Mat3);

    fn apply(&self, p: Vec3) -> Vec3 {
        self.step(p).0
    }
}

fn compose(steps: &[(usize, f64, f64)], p: Vec3) -> (Vec3, Mat3) {
    let mut point = p;
    let mut jac: Option<Mat3> = None;
    for &(axis, alpha0, kappa) in steps {
        let (next, j) = sphere_step(axis, alpha0, kappa, point);
        jac = Some(match jac {
            None => j,
            Some(prev) => {
                let mut out = [[0.0; 3]; 3];
                for r in 0..3 {
                    for c in 0..3 {
                        out[r][c] = (0..3).map(|k| j[r][k] * prev[k][c]).sum();
                    }
                }
                out
            }
        });
        point = next;
    }
    (point, jac.unwrap_or([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
}

/// Classical limit of the orthogonal-class top: `x` rotation by `a`,
/// then a `z` twist of strength `c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KickedTopClassical {
    pub a: f64,
    pub c: f64,
}

impl SphereMap for KickedTopClassical {
    fn step(&self, p: Vec3) -> (Vec3, Mat3) {
        compose(&[(0, self.a, 0.0), (2, 0.0, self.c)], p)
    }
}

/// Classical limit of the unitary-class top: `x` rotation by `p_kick`,
/// a `z` twist of strength `lambda`, then a `y` twist of strength
/// `lambda_prime`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleTorsionClassical {
    pub p_kick: f64,
    pub lambda: f64,
    pub lambda_prime: f64,
}

impl SphereMap for DoubleTorsionClassical {
    fn step(&self, p: Vec3) -> (Vec3, Mat3) {
        compose(
            &[(0, self.p_kick, 0.0), (2, 0.0, self.lambda), (1, 0.0, self.lambda_prime)],
            p,
        )
    }
}

/// Largest Lyapunov exponent from one starting point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    /// Per-kick exponent, natural log.
    pub lambda: f64,
    pub iterations: usize,
    pub transient: usize,
    /// Whether the running estimate settled (first and second half agree).
    pub converged: bool,
}

/// A deterministic unit tangent vector at `p`.
fn seed_tangent(p: Vec3) -> Vec3 {
    // Start from the axis least aligned with p so orthogonalization
    // never degenerates.
    let mut best = 0;
    for i in 1..3 {
        if p[i].abs() < p[best].abs() {
            best = i;
        }
    }
    let mut e = [0.0; 3];
    e[best] = 1.0;
    let proj = dot(e, p);
    normalize([e[0] - proj * p[0], e[1] - proj * p[1], e[2] - proj * p[2]])
        .expect("axis was chosen not to be parallel to p")
}

/// Benettin tangent-renormalization estimate of the largest Lyapunov
/// exponent, with the tangent vector re-projected onto the sphere's
/// tangent plane every step.
pub fn lyapunov_exponent(
    map: &dyn SphereMap,
    start: Vec3,
    iterations: usize,
    transient: usize,
) -> Result<LyapunovResult> {
    if iterations < 100 {
        return Err(Error::invalid("Lyapunov estimates need at least 100 iterations"));
    }
    let mut p = normalize(start).ok_or_else(|| Error::invalid("starting point must be nonzero"))?;
    for _ in 0..transient {
        p = normalize(map.apply(p)).ok_or_else(|| Error::numerical("orbit left the sphere"))?;
    }
    let mut v = seed_tangent(p);
    let mut log_sum = 0.0_f64;
    let mut half_sum = 0.0_f64;
    for it in 0..iterations {
        let (next, jac) = map.step(p);
        p = normalize(next).ok_or_else(|| Error::numerical("orbit left the sphere"))?;
        v = mat_vec(&jac, v);
        // Remove the radial component; sphere maps only stretch within
        // the tangent plane and roundoff must not accumulate outward.
        let radial = dot(v, p);
        v = [v[0] - radial * p[0], v[1] - radial * p[1], v[2] - radial * p[2]];
        let growth = norm(v);
        if growth == 0.0 || !growth.is_finite() {
            return Err(Error::numerical("tangent vector collapsed"));
        }
        log_sum += growth.ln();
        if it < iterations / 2 {
            half_sum = log_sum;
        }
        v = [v[0] / growth, v[1] / growth, v[2] / growth];
    }
    let lambda = log_sum / iterations as f64;
    let lambda_half = half_sum / (iterations / 2) as f64;
    let converged = (lambda - lambda_half).abs() <= (0.02 * lambda.abs()).max(1e-3);
    Ok(LyapunovResult { lambda, iterations, transient, converged })
}

/// Ensemble statistics of the largest Lyapunov exponent over random
/// starting points.
#[derive(Clone, Debug)]
pub struct EnsembleLyapunov {
    /// Median exponent, the chaotic-sea value when islands are rare.
    pub median: f64,
    pub lambdas: Vec<f64>,
    pub converged_fraction: f64,
}

/// Runs [`lyapunov_exponent`] from `points` seeded uniform random
/// starting points and reports the median.
pub fn ensemble_lyapunov(
    map: &dyn SphereMap,
    points: usize,
    iterations: usize,
    transient: usize,
    seed: u64,
) -> Result<EnsembleLyapunov> {
    if points == 0 {
        return Err(Error::invalid("ensemble needs at least one starting point"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let starts: Vec<Vec3> = (0..points)
        .map(|_| {
            let z: f64 = 2.0 * rng.gen::<f64>() - 1.0;
            let phi: f64 = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            let r = (1.0 - z * z).max(0.0).sqrt();
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect();
    let results: Vec<LyapunovResult> = starts
        .par_iter()
        .map(|&p| lyapunov_exponent(map, p, iterations, transient))
        .collect::<Result<_>>()?;
    let lambdas: Vec<f64> = results.iter().map(|r| r.lambda).collect();
    let converged = results.iter().filter(|r| r.converged).count();
    let mut sorted = lambdas.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if points % 2 == 1 {
        sorted[points / 2]
    } else {
        0.5 * (sorted[points / 2 - 1] + sorted[points / 2])
    };
    Ok(EnsembleLyapunov { median, lambdas, converged_fraction: converged as f64 / points as f64 })
}

/// Settings for the joint classical/quantum scan over the
/// orthogonal-class top's parameter plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagramOptions {
    pub a_range: (f64, f64),
    pub c_range: (f64, f64),
    /// `(a_cells, c_cells)`.
    pub grid: (usize, usize),
    /// Spin count for the quantum side of each cell.
    pub n: usize,
    pub window: AveragingWindow,
    pub le_points: usize,
    pub le_iterations: usize,
    pub le_transient: usize,
    pub seed: u64,
}

impl Default for PhaseDiagramOptions {
    fn default() -> Self {
        Self {
            a_range: (0.0, 3.0),
            c_range: (0.0, 15.0),
            grid: (50, 50),
            n: 40,
            window: AveragingWindow::kicks(200, 1000),
            le_points: 100,
            le_iterations: 10_000,
            le_transient: 1000,
            seed: 7,
        }
    }
}

/// Classical exponent and quantum saturation ratio on a parameter grid.
#[derive(Clone, Debug)]
pub struct PhaseDiagram {
    pub a_values: Vec<f64>,
    pub c_values: Vec<f64>,
    /// Row-major over `(a, c)` cells: `idx = ia * c_values.len() + ic`.
    pub lambda: Vec<f64>,
    pub qfi_mean: Vec<f64>,
    /// `qfi_mean` over the dimension-counting prediction `N(N+2)/3`.
    pub qfi_ratio: Vec<f64>,
    pub n: usize,
}

impl PhaseDiagram {
    pub fn cell(&self, ia: usize, ic: usize) -> usize {
        ia * self.c_values.len() + ic
    }

    /// CSV rows `(A, C, lambda_le, qfi_mean, qfi_over_prediction)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("A,C,lambda_le,qfi_mean,qfi_over_prediction\n");
        for (ia, &a) in self.a_values.iter().enumerate() {
            for (ic, &c) in self.c_values.iter().enumerate() {
                let i = self.cell(ia, ic);
                out.push_str(&format!(
                    "{a:.12e},{c:.12e},{:.12e},{:.12e},{:.12e}\n",
                    self.lambda[i], self.qfi_mean[i], self.qfi_ratio[i]
                ));
            }
        }
        out
    }

    /// Fraction of cells where the chaos mask (`λ > le_threshold`) and
    /// the saturation mask (`ratio > ratio_threshold`) agree.
    pub fn mask_agreement(&self, le_threshold: f64, ratio_threshold: f64) -> f64 {
        let total = self.lambda.len();
        let agree = self
            .lambda
            .iter()
            .zip(self.qfi_ratio.iter())
            .filter(|(&l, &r)| (l > le_threshold) == (r > ratio_threshold))
            .count();
        agree as f64 / total as f64
    }

    /// Pearson correlation of the two binary masks.
    pub fn mask_correlation(&self, le_threshold: f64, ratio_threshold: f64) -> f64 {
        let xs: Vec<f64> =
            self.lambda.iter().map(|&l| if l > le_threshold { 1.0 } else { 0.0 }).collect();
        let ys: Vec<f64> =
            self.qfi_ratio.iter().map(|&r| if r > ratio_threshold { 1.0 } else { 0.0 }).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut vx = 0.0;
        let mut vy = 0.0;
        for (x, y) in xs.iter().zip(ys.iter()) {
            num += (x - mx) * (y - my);
            vx += (x - mx) * (x - mx);
            vy += (y - my) * (y - my);
        }
        if vx == 0.0 || vy == 0.0 {
            return 0.0;
        }
        num / (vx * vy).sqrt()
    }
}

/// Scans the orthogonal-class top's `(a, c)` plane: classical median
/// exponent and quantum saturation ratio per cell. Cells are computed
/// in parallel; the output layout depends only on the options.
///
/// The saturation ratio grades the *worst* of the three collective
/// axes. Chaotic saturation is isotropic, so the minimum stays at the
/// ergodic value; integrable twisting spreads the state into a ring
/// whose normal axis keeps a small variance, and grading that axis
/// keeps such cells out of the chaotic mask.
pub fn phase_diagram_scan(opts: &PhaseDiagramOptions) -> Result<PhaseDiagram> {
    let (na, nc) = opts.grid;
    if na < 2 || nc < 2 {
        return Err(Error::invalid("phase diagram needs at least a 2x2 grid"));
    }
    if opts.n == 0 {
        return Err(Error::invalid("phase diagram needs at least one spin"));
    }
    let a_values: Vec<f64> = (0..na)
        .map(|i| opts.a_range.0 + (opts.a_range.1 - opts.a_range.0) * i as f64 / (na - 1) as f64)
        .collect();
    let c_values: Vec<f64> = (0..nc)
        .map(|i| opts.c_range.0 + (opts.c_range.1 - opts.c_range.0) * i as f64 / (nc - 1) as f64)
        .collect();

    let prediction = predict::symmetric_prediction(opts.n);
    let jx = collective_op(opts.n, Axis::X, Representation::Symmetric)?;
    let jy = collective_op(opts.n, Axis::Y, Representation::Symmetric)?;
    let jz = collective_op(opts.n, Axis::Z, Representation::Symmetric)?;
    let psi0 = coherent_spin_state(
        opts.n,
        std::f64::consts::FRAC_PI_2,
        -std::f64::consts::FRAC_PI_2,
        Representation::Symmetric,
    )?;

    let cells: Vec<(f64, f64)> = a_values
        .iter()
        .flat_map(|&a| c_values.iter().map(move |&c| (a, c)))
        .collect();
    let results: Vec<(f64, f64)> = cells
        .par_iter()
        .map(|&(a, c)| -> Result<(f64, f64)> {
            let map = KickedTopClassical { a, c };
            let le = ensemble_lyapunov(
                &map,
                opts.le_points,
                opts.le_iterations,
                opts.le_transient,
                opts.seed,
            )?;
            let u = models::floquet_coe(opts.n, a, c)?;
            let spec = SpectralDecomposition::of_unitary(&u)?;
            let avg = time_averaged_qfi(
                &psi0,
                &spec,
                &[("x", &jx), ("y", &jy), ("z", &jz)],
                &opts.window,
            )?;
            let worst = avg.mean.iter().copied().fold(f64::INFINITY, f64::min);
            Ok((le.median, worst))
        })
        .collect::<Result<_>>()?;

    let lambda: Vec<f64> = results.iter().map(|r| r.0).collect();
    let qfi_mean: Vec<f64> = results.iter().map(|r| r.1).collect();
    let qfi_ratio: Vec<f64> = qfi_mean.iter().map(|&f| f / prediction).collect();
    Ok(PhaseDiagram { a_values, c_values, lambda, qfi_mean, qfi_ratio, n: opts.n })
}
