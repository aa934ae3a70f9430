//! Spin Wigner quasi-probability on the sphere.
//!
//! The field is the multipole expansion
//!
//! ```text
//! W(θ, φ) = Σ_{k=0}^{2j} Σ_{q=−k}^{k} ρ_kq Y_kq(θ, φ),
//! ρ_kq = ⟨ψ| T_kq† |ψ⟩,
//! ```
//!
//! with `T_kq` the orthonormal spherical tensor operators of the spin-j
//! space and `Y_kq` orthonormal spherical harmonics. A coherent state
//! maps to a single Gaussian-like cap of angular size `~ 1/√N`; a
//! chaotic evolved state spreads over the whole sphere with speckle on
//! the much finer scale set by its Fisher information. The companion
//! diagnostic [`rotation_fidelity_width`] measures that scale directly
//! as the smallest rotation angle that drops the overlap
//! `|⟨ψ|e^{iθ J_n}|ψ⟩|²` to one half.
//!
//! Tensor operators are built without ever storing a dense matrix:
//! `T_kq` only populates the q-th diagonal in the `Jz` basis, and its
//! entries factor into the q-fold ladder envelope `⟨m+q|(J₊)^q|m⟩`
//! times a polynomial in m of degree `k − q`. For fixed q those
//! polynomials are the orthonormal family of the squared envelope as a
//! discrete measure, so the whole ladder comes out of a Lanczos-style
//! three-term recurrence with reorthogonalization. (The textbook
//! alternative, repeated commutator lowering
//! `[J₋, T_kq] ∝ T_{k,q−1}`, amplifies cross-rank roundoff by roughly
//! `k_max/k` per step and falls apart beyond j ≈ 20; it survives here
//! only as a small-spin test oracle.) Harmonics use the fully
//! normalized associated Legendre recursion with the Condon-Shortley
//! phase kept explicit, so that hermiticity `T_{k,−q} = (−1)^q T_kq†`
//! folds the q < 0 half of the sum into twice the real part of the
//! q > 0 half.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dynamics::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::spin::{build_collective_ops, Representation, StateVector};

/// Largest qubit count accepted by the moment recursion. The cost is
/// cubic in N and the Legendre sums quadratic per grid point; 200 keeps
/// a full field under a second while covering every study in the crate.
pub const WIGNER_QUBIT_CAP: usize = 200;

/// `⟨m+1|J₊|m⟩ = ⟨m|J₋|m+1⟩` for spin j.
fn ladder_amp(j: f64, m: f64) -> f64 {
    let x = j * (j + 1.0) - m * (m + 1.0);
    if x <= 0.0 {
        0.0
    } else {
        x.sqrt()
    }
}

/// Normalized q-fold ladder envelope, `⟨m+q|(J₊)^q|m⟩` over the
/// columns of the q-th diagonal, unit Frobenius norm. Computed in log
/// space; the raw products overflow past q ~ 150.
fn ladder_envelope(j: f64, q: usize) -> Vec<f64> {
    let dim = (2.0 * j + 1.0).round() as usize;
    assert!(q < dim, "diagonal offset exceeds 2j");
    let log_entries: Vec<f64> = (q..dim)
        .map(|col| {
            let m = j - col as f64;
            (0..q).map(|step| ladder_amp(j, m + step as f64).ln()).sum()
        })
        .collect();
    let peak = log_entries.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut env: Vec<f64> = log_entries.iter().map(|&l| (l - peak).exp()).collect();
    let norm = env.iter().map(|e| e * e).sum::<f64>().sqrt();
    env.iter_mut().for_each(|e| *e /= norm);
    env
}

/// All tensor diagonals of one azimuthal offset, `diagonals[k − q]` for
/// `k = q ..= 2j`, each of unit Frobenius norm.
///
/// The entries are `(−1)^q · envelope(m) · p_{k−q}(m)` with `p` the
/// orthonormal polynomials of the squared envelope, generated by the
/// Lanczos recurrence on the diagonal operator `m` with the envelope
/// as the starting vector. Reorthogonalization keeps the family
/// orthonormal out to the full rank even for the largest spins.
fn tensor_diagonals(j: f64, q: usize) -> Vec<Vec<f64>> {
    let dim = (2.0 * j + 1.0).round() as usize;
    let len = dim - q;
    let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
    let sources: Vec<f64> = (q..dim).map(|col| j - col as f64).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(len);
    basis.push(ladder_envelope(j, q));
    while basis.len() < len {
        let curr = basis.last().expect("seeded above");
        let mut w: Vec<f64> = curr.iter().zip(sources.iter()).map(|(v, m)| v * m).collect();
        // Twice-through Gram-Schmidt against the whole family; the bare
        // three-term recurrence sheds orthogonality over long ladders.
        for _ in 0..2 {
            for prev in &basis {
                let overlap: f64 = w.iter().zip(prev.iter()).map(|(a, b)| a * b).sum();
                w.iter_mut().zip(prev.iter()).for_each(|(a, b)| *a -= overlap * b);
            }
        }
        let norm = w.iter().map(|e| e * e).sum::<f64>().sqrt();
        assert!(norm > 1e-300, "tensor ladder degenerated at offset {q}");
        w.iter_mut().for_each(|e| *e /= norm);
        basis.push(w);
    }
    if sign < 0.0 {
        for diag in &mut basis {
            diag.iter_mut().for_each(|e| *e = -*e);
        }
    }
    basis
}

/// Spherical-tensor moments `ρ_kq = ⟨ψ|T_kq†|ψ⟩` of a pure state, for
/// `0 ≤ q ≤ k ≤ 2j`. The q < 0 half follows from hermiticity.
#[derive(Clone, Debug)]
pub struct WignerMoments {
    /// `columns[q][k − q] = ρ_kq`.
    columns: Vec<Vec<C64>>,
    k_max: usize,
    qubit_count: usize,
}

impl WignerMoments {
    pub fn of_state(state: &StateVector) -> Result<Self> {
        if state.basis.representation != Representation::Symmetric {
            return Err(Error::basis(
                "Wigner moments are defined on the symmetric (collective) representation",
            ));
        }
        let n = state.basis.qubit_count;
        if n > WIGNER_QUBIT_CAP {
            return Err(Error::capacity(format!(
                "Wigner moment recursion capped at {WIGNER_QUBIT_CAP} qubits, got {n}"
            )));
        }
        let dim = state.dim();
        let j = 0.5 * n as f64;
        let k_max = dim - 1;
        let amps = &state.amplitudes;

        let columns: Vec<Vec<C64>> = (0..=k_max)
            .into_par_iter()
            .map(|q| {
                tensor_diagonals(j, q)
                    .iter()
                    .map(|diag| {
                        diag.iter()
                            .enumerate()
                            .map(|(idx, &t)| t * amps[q + idx].conj() * amps[idx])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok(Self { columns, k_max, qubit_count: n })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    /// The monopole moment, `1/√(N+1)` for any normalized pure state.
    pub fn monopole(&self) -> f64 {
        self.columns[0][0].re
    }

    /// Exact integral of the field over the sphere, `√(4π) ρ_00`.
    pub fn total_integral(&self) -> f64 {
        (4.0 * std::f64::consts::PI).sqrt() * self.monopole()
    }

    /// Evaluates the field at one point of the sphere.
    pub fn evaluate(&self, theta: f64, phi: f64) -> f64 {
        let profile = self.azimuthal_profile(theta.cos(), theta.sin());
        Self::combine(&profile, phi)
    }

    /// `c_q(θ) = Σ_k ρ_kq P̃_kq(cos θ)` for every q at fixed θ.
    fn azimuthal_profile(&self, cos_t: f64, sin_t: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.k_max + 1];
        // Sectoral seed P̃_qq, advanced as q grows.
        let mut sectoral = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
        for q in 0..=self.k_max {
            let qf = q as f64;
            let mut acc = C64::new(0.0, 0.0);
            // Upward three-term recursion in k at fixed q.
            let mut prev = 0.0_f64; // P̃_{k−2,q}
            let mut curr = sectoral; // P̃_{k−1,q}, starts at P̃_qq
            acc += self.columns[q][0] * curr;
            for k in (q + 1)..=self.k_max {
                let kf = k as f64;
                let next = if k == q + 1 {
                    (2.0 * qf + 3.0).sqrt() * cos_t * curr
                } else {
                    let a = ((4.0 * kf * kf - 1.0) / (kf * kf - qf * qf)).sqrt();
                    let b = (((kf - 1.0) * (kf - 1.0) - qf * qf)
                        / (4.0 * (kf - 1.0) * (kf - 1.0) - 1.0))
                        .sqrt();
                    a * (cos_t * curr - b * prev)
                };
                acc += self.columns[q][k - q] * next;
                prev = curr;
                curr = next;
            }
            out[q] = acc;
            sectoral *= ((2.0 * qf + 3.0) / (2.0 * qf + 2.0)).sqrt() * sin_t;
        }
        out
    }

    /// Recombines an azimuthal profile into the real field value,
    /// `W = Re c_0 + Σ_{q≥1} 2 (−1)^q Re[c_q e^{iqφ}]`.
    fn combine(profile: &[C64], phi: f64) -> f64 {
        let rotor = C64::from_polar(1.0, phi);
        let mut phase = C64::new(1.0, 0.0);
        let mut total = profile[0].re;
        for (q, c) in profile.iter().enumerate().skip(1) {
            phase *= rotor;
            let term = 2.0 * (c * phase).re;
            total += if q % 2 == 0 { term } else { -term };
        }
        total
    }
}

/// A real field sampled on a midpoint θ grid and a uniform φ grid.
#[derive(Clone, Debug)]
pub struct SphericalField {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Row-major over θ rows: `values[it * phi.len() + ip]`.
    pub values: Vec<f64>,
    /// Exact value of `∫ W dΩ` for this state.
    pub normalization: f64,
}

impl SphericalField {
    pub fn value(&self, it: usize, ip: usize) -> f64 {
        self.values[it * self.phi.len() + ip]
    }

    /// Midpoint-rule quadrature `Σ W sinθ Δθ Δφ`.
    pub fn integral(&self) -> f64 {
        let d_theta = std::f64::consts::PI / self.theta.len() as f64;
        let d_phi = 2.0 * std::f64::consts::PI / self.phi.len() as f64;
        let mut total = 0.0;
        for (it, &t) in self.theta.iter().enumerate() {
            let row: f64 = self.phi.iter().enumerate().map(|(ip, _)| self.value(it, ip)).sum();
            total += row * t.sin();
        }
        total * d_theta * d_phi
    }

    /// Location and value of the grid maximum.
    pub fn max_point(&self) -> (f64, f64, f64) {
        let (idx, &max) = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("field is never empty");
        let it = idx / self.phi.len();
        let ip = idx % self.phi.len();
        (self.theta[it], self.phi[ip], max)
    }

    /// CSV rows `(theta, phi, value)` in grid order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,phi,value\n");
        for (it, &t) in self.theta.iter().enumerate() {
            for (ip, &p) in self.phi.iter().enumerate() {
                out.push_str(&format!("{t:.12e},{p:.12e},{:.12e}\n", self.value(it, ip)));
            }
        }
        out
    }
}

/// Samples the Wigner field of a pure symmetric-representation state.
///
/// θ rows are midpoints `(i + 1/2)·π/n_theta` so no sample sits on the
/// coordinate poles; φ columns are the uniform periodic grid. Grids of
/// at least `2(N+1)` points per direction keep the quadrature of the
/// highest multipoles honest; 64 is the accepted floor.
pub fn wigner_grid(state: &StateVector, n_theta: usize, n_phi: usize) -> Result<SphericalField> {
    if n_theta < 64 || n_phi < 64 {
        return Err(Error::invalid("Wigner grids need at least 64 points per direction"));
    }
    let moments = WignerMoments::of_state(state)?;
    let theta: Vec<f64> =
        (0..n_theta).map(|i| (i as f64 + 0.5) * std::f64::consts::PI / n_theta as f64).collect();
    let phi: Vec<f64> =
        (0..n_phi).map(|i| 2.0 * std::f64::consts::PI * i as f64 / n_phi as f64).collect();
    let rows: Vec<Vec<f64>> = theta
        .par_iter()
        .map(|&t| {
            let profile = moments.azimuthal_profile(t.cos(), t.sin());
            phi.iter().map(|&p| WignerMoments::combine(&profile, p)).collect()
        })
        .collect();
    let values = rows.concat();
    Ok(SphericalField { theta, phi, values, normalization: moments.total_integral() })
}

/// Result of the half-overlap rotation scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityWidth {
    /// Smallest θ > 0 with `|⟨ψ|e^{iθ J_n}|ψ⟩|² ≤ 1/2`, or π if the
    /// overlap never crosses.
    pub theta: f64,
    pub crossed: bool,
}

/// Angular size of a state along one rotation axis: the smallest angle
/// whose collective rotation drops the fidelity to one half.
///
/// The overlap is evaluated spectrally, `f(θ) = |Σ_m w_m e^{iθλ_m}|²`
/// with `w_m` the state's weights on the `J_n` eigenbasis, scanned on a
/// fine bracket grid and then bisected. For a coherent state transverse
/// to its axis this reproduces `2 acos(2^{−1/(2N)}) ≈ 2√(ln 2)/√N`; for
/// a chaotic state it contracts to `≈ 2√(ln 2)/√F_Q`, the substructure
/// scale of the Wigner speckle.
pub fn rotation_fidelity_width(state: &StateVector, direction: [f64; 3]) -> Result<FidelityWidth> {
    if state.basis.representation != Representation::Symmetric {
        return Err(Error::basis("rotation widths use the symmetric representation"));
    }
    let ops = build_collective_ops(state.basis.qubit_count, Representation::Symmetric)?;
    let generator = ops.along(direction)?;
    let spectral = SpectralDecomposition::of_hermitian(&generator)?;
    let weights: Vec<f64> = spectral.overlaps(state)?.iter().map(|b| b.norm_sqr()).collect();
    let lambdas = &spectral.values;

    let overlap = |theta: f64| -> f64 {
        let mut sum = C64::new(0.0, 0.0);
        for (w, l) in weights.iter().zip(lambdas.iter()) {
            sum += C64::from_polar(*w, theta * l);
        }
        sum.norm_sqr()
    };

    const SCAN: usize = 2048;
    let mut lo = 0.0_f64;
    let mut hi = None;
    for s in 1..=SCAN {
        let theta = std::f64::consts::PI * s as f64 / SCAN as f64;
        if overlap(theta) <= 0.5 {
            hi = Some(theta);
            break;
        }
        lo = theta;
    }
    let Some(mut hi) = hi else {
        return Ok(FidelityWidth { theta: std::f64::consts::PI, crossed: false });
    };
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if overlap(mid) <= 0.5 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(FidelityWidth { theta: 0.5 * (lo + hi), crossed: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve;
    use crate::linalg::CMat;
    use crate::models;
    use crate::spin::coherent_spin_state;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    /// Column range of the q-th diagonal: columns `base..base + len` hold
    /// entries at `(col − q, col)`.
    fn diagonal_base(dim: usize, q: i64) -> (usize, usize) {
        let abs = q.unsigned_abs() as usize;
        assert!(abs < dim, "diagonal offset out of range");
        let base = if q > 0 { abs } else { 0 };
        (base, dim - abs)
    }

    /// Commutator-lowering construction of tensor diagonals: exact in
    /// exact arithmetic, numerically healthy only for small spins, and
    /// completely independent of the production recurrence. Starts at
    /// `T_kk = (−1)^k (J₊)^k / ‖·‖` and walks down with
    /// `T_{k,q−1} = [J₋, T_kq] / √(k(k+1) − q(q−1))`.
    fn lowered_diagonal(j: f64, k: usize, q: i64) -> Vec<f64> {
        let dim = (2.0 * j + 1.0).round() as usize;
        assert!(k < dim && q >= -(k as i64) && q <= k as i64);
        let mut t = vec![1.0_f64; dim - k];
        for step in 0..k {
            for (idx, entry) in t.iter_mut().enumerate() {
                let m = j - (k + idx) as f64 + step as f64;
                *entry *= ladder_amp(j, m);
            }
        }
        let norm = t.iter().map(|e| e * e).sum::<f64>().sqrt();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        t.iter_mut().for_each(|e| *e *= sign / norm);

        let mut level = k as i64;
        while level > q {
            let kk = k as f64;
            let qq = level as f64;
            let denom = (kk * (kk + 1.0) - qq * (qq - 1.0)).sqrt();
            let (in_base, in_len) = diagonal_base(dim, level);
            let (out_base, out_len) = diagonal_base(dim, level - 1);
            let fetch = |col: usize| -> f64 {
                if col >= in_base && col < in_base + in_len {
                    t[col - in_base]
                } else {
                    0.0
                }
            };
            t = (0..out_len)
                .map(|idx| {
                    let col = out_base + idx;
                    let m = j - col as f64;
                    (ladder_amp(j, m + qq - 1.0) * fetch(col)
                        - ladder_amp(j, m - 1.0) * fetch(col + 1))
                        / denom
                })
                .collect();
            level -= 1;
        }
        t
    }

    /// Dense matrix of one tensor diagonal, for small-j cross-checks.
    fn dense_tensor(j: f64, k: usize, q: i64) -> CMat {
        let dim = (2.0 * j + 1.0).round() as usize;
        let diag = lowered_diagonal(j, k, q);
        let (base, len) = diagonal_base(dim, q);
        let mut m = CMat::zeros(dim, dim);
        for idx in 0..len {
            let col = base + idx;
            let row = (col as i64 - q) as usize;
            m[(row, col)] = C64::new(diag[idx], 0.0);
        }
        m
    }

    #[test]
    fn recurrence_agrees_with_commutator_lowering_at_small_spin() {
        for &j in &[2.0_f64, 3.5, 6.0] {
            let dim = (2.0 * j + 1.0).round() as usize;
            for q in 0..dim {
                let diags = tensor_diagonals(j, q);
                for (d_idx, diag) in diags.iter().enumerate() {
                    let k = q + d_idx;
                    let oracle = lowered_diagonal(j, k, q as i64);
                    for (a, b) in diag.iter().zip(oracle.iter()) {
                        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn tensor_family_is_orthonormal_at_small_j() {
        let j = 2.0;
        let mut family = Vec::new();
        for k in 0..=4_usize {
            for q in -(k as i64)..=(k as i64) {
                family.push(((k, q), dense_tensor(j, k, q)));
            }
        }
        assert_eq!(family.len(), 25);
        for (label_a, a) in &family {
            for (label_b, b) in &family {
                let overlap: C64 = (a.adjoint() * b).trace();
                let expected = if label_a == label_b { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(overlap.re, expected, epsilon = 1e-12);
                assert_abs_diff_eq!(overlap.im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn rank_one_and_two_tensors_match_closed_forms() {
        let n = 7;
        let j = 3.5;
        let ops = build_collective_ops(n, Representation::Symmetric).unwrap();
        let jz = &ops.jz.matrix;
        let norm_z = (jz * jz).trace().re.sqrt();
        let t10 = dense_tensor(j, 1, 0);
        assert!((t10.clone() - jz / C64::from(norm_z)).norm() < 1e-12, "T_10 is +Jz normalized");

        // T_20 ∝ 3Jz² − j(j+1): compare directions.
        let dim = n + 1;
        let casimir = j * (j + 1.0);
        let mut quad = jz * jz * C64::from(3.0);
        for i in 0..dim {
            quad[(i, i)] -= C64::from(casimir);
        }
        let t20 = dense_tensor(j, 2, 0);
        let quad_normed = quad.clone() / C64::from((quad.adjoint() * &quad).trace().re.sqrt());
        assert!((t20 - quad_normed).norm() < 1e-12, "T_20 is the normalized quadrupole");

        // Bottom of the ladder: T_{k,−k} = +(J₋)^k / ‖·‖, since
        // hermiticity gives T_{k,−k} = (−1)^k T_kk† and the highest
        // weight already carries (−1)^k. The sign survives 2k lowering
        // steps only if every normalization factor is right.
        let k = 5;
        let jm = {
            let jp = &ops.jx.matrix + &ops.jy.matrix * C64::new(0.0, 1.0);
            jp.adjoint()
        };
        let mut power = CMat::identity(dim, dim);
        for _ in 0..k {
            power = &power * &jm;
        }
        let norm = (power.adjoint() * &power).trace().re.sqrt();
        let expected = power / C64::from(norm);
        let got = dense_tensor(j, k, -(k as i64));
        assert!((got - expected).norm() < 1e-10, "bottom-weight tensor phase or scale is off");
    }

    #[test]
    fn large_spin_family_stays_orthonormal_with_exact_low_ranks() {
        let j = 100.0; // N = 200
        let jj = j * (j + 1.0);
        for &q in &[0_usize, 1, 50, 117, 200] {
            let diags = tensor_diagonals(j, q);
            // Pairwise orthonormality across all ranks of this offset.
            for (a_idx, a) in diags.iter().enumerate() {
                for (b_idx, b) in diags.iter().enumerate() {
                    let dot: f64 = a.iter().zip(b.iter()).map(|(x, y)| x * y).sum();
                    let expected = if a_idx == b_idx { 1.0 } else { 0.0 };
                    assert!(
                        (dot - expected).abs() < 1e-10,
                        "offset {q}: ranks {a_idx}/{b_idx} overlap {dot}"
                    );
                }
            }
        }

        // Closed forms: T_10 ∝ m, T_20 ∝ 3m² − j(j+1),
        // T_21 ∝ −g(m)(2m + 1) from the anticommutator {J₊, Jz}.
        let dim = 201;
        let q0 = tensor_diagonals(j, 0);
        let ms: Vec<f64> = (0..dim).map(|i| j - i as f64).collect();
        let check = |got: &[f64], raw: Vec<f64>, label: &str| {
            let norm = raw.iter().map(|e| e * e).sum::<f64>().sqrt();
            for (g, r) in got.iter().zip(raw.iter()) {
                assert!((g - r / norm).abs() < 1e-10, "{label} entry {g} vs {}", r / norm);
            }
        };
        check(&q0[1], ms.clone(), "T_10");
        check(&q0[2], ms.iter().map(|m| 3.0 * m * m - jj).collect(), "T_20");
        let q1 = tensor_diagonals(j, 1);
        let raw: Vec<f64> =
            (1..dim).map(|col| -ladder_amp(j, j - col as f64) * (2.0 * (j - col as f64) + 1.0)).collect();
        check(&q1[1], raw, "T_21");
    }

    #[test]
    fn single_qubit_coherent_state_has_the_textbook_field() {
        // CSS along +x for one qubit: W = 1/√(8π) + √(3/8π) sinθ cosφ.
        let psi = coherent_spin_state(1, PI / 2.0, 0.0, Representation::Symmetric).unwrap();
        let moments = WignerMoments::of_state(&psi).unwrap();
        let closed = |theta: f64, phi: f64| {
            1.0 / (8.0 * PI).sqrt() + (3.0 / (8.0 * PI)).sqrt() * theta.sin() * phi.cos()
        };
        for &(t, p) in
            &[(0.3, 1.1), (PI / 2.0, 0.0), (PI / 2.0, PI), (2.4, -0.7), (1.0, 4.0), (2.9, 2.2)]
        {
            assert_abs_diff_eq!(moments.evaluate(t, p), closed(t, p), epsilon = 1e-12);
        }
    }

    #[test]
    fn field_is_rotationally_covariant() {
        use rand::prelude::*;
        use rand_chacha::ChaCha12Rng;
        let n = 24;
        let pole = coherent_spin_state(n, 0.0, 0.0, Representation::Symmetric).unwrap();
        let pole_moments = WignerMoments::of_state(&pole).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for _ in 0..10 {
            let theta0 = (1.0 - 2.0 * rng.gen::<f64>()).acos();
            let phi0 = 2.0 * PI * rng.gen::<f64>();
            let rotated =
                coherent_spin_state(n, theta0, phi0, Representation::Symmetric).unwrap();
            let moments = WignerMoments::of_state(&rotated).unwrap();
            let axis =
                [theta0.sin() * phi0.cos(), theta0.sin() * phi0.sin(), theta0.cos()];
            for _ in 0..20 {
                let t = (1.0 - 2.0 * rng.gen::<f64>()).acos();
                let p = 2.0 * PI * rng.gen::<f64>();
                let point = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
                let gamma =
                    (axis[0] * point[0] + axis[1] * point[1] + axis[2] * point[2]).clamp(-1.0, 1.0);
                let reference = pole_moments.evaluate(gamma.acos(), 0.0);
                assert_abs_diff_eq!(moments.evaluate(t, p), reference, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn coherent_state_grid_peaks_at_its_axis_and_normalizes() {
        let n = 40;
        let psi = coherent_spin_state(n, 0.0, 0.0, Representation::Symmetric).unwrap();
        let field = wigner_grid(&psi, 96, 96).unwrap();
        let (t_peak, _, peak) = field.max_point();
        assert!(peak > 0.0);
        assert!(t_peak < PI / 96.0 + 1e-12, "polar coherent state peaked at θ = {t_peak}");
        let expected = (4.0 * PI / (n as f64 + 1.0)).sqrt();
        assert_abs_diff_eq!(field.normalization, expected, epsilon = 1e-12);
        assert!(
            (field.integral() - expected).abs() < 0.01 * expected,
            "quadrature {} vs exact {}",
            field.integral(),
            expected
        );

        // Azimuthal symmetry: the polar field cannot depend on φ.
        for it in [0, 20, 48, 95] {
            let row: Vec<f64> = (0..96).map(|ip| field.value(it, ip)).collect();
            let spread = row.iter().fold(0.0_f64, |a, &b| a.max((b - row[0]).abs()));
            assert!(spread < 1e-10, "azimuthal spread {spread} at θ row {it}");
        }

        // A tilted state peaks at its own axis instead.
        let tilted =
            coherent_spin_state(n, PI / 2.0, 1.5 * PI, Representation::Symmetric).unwrap();
        let field = wigner_grid(&tilted, 96, 96).unwrap();
        let (t_peak, p_peak, _) = field.max_point();
        assert!((t_peak - PI / 2.0).abs() <= PI / 96.0);
        assert!((p_peak - 1.5 * PI).abs() <= 2.0 * PI / 96.0);
    }

    #[test]
    fn chaotic_state_grid_still_normalizes() {
        let u = models::floquet_coe(60, 1.7, 10.0).unwrap();
        let spec = SpectralDecomposition::of_unitary(&u).unwrap();
        let psi0 =
            coherent_spin_state(60, PI / 2.0, -PI / 2.0, Representation::Symmetric).unwrap();
        let psi = evolve(&psi0, &spec, 400.0).unwrap();
        let field = wigner_grid(&psi, 128, 128).unwrap();
        let expected = (4.0 * PI / 61.0).sqrt();
        assert!(
            (field.integral() - expected).abs() < 0.01 * expected,
            "chaotic-state quadrature {} vs exact {}",
            field.integral(),
            expected
        );
        // Spread over the sphere: the peak is far below a coherent cap,
        // whose height is of order √N.
        let cap = wigner_grid(&psi0, 128, 128).unwrap().max_point().2;
        assert!(field.max_point().2 < 0.5 * cap);
    }

    #[test]
    fn coherent_width_matches_the_analytic_overlap() {
        for &n in &[30_usize, 100] {
            let psi = coherent_spin_state(n, 0.0, 0.0, Representation::Symmetric).unwrap();
            let width = rotation_fidelity_width(&psi, [1.0, 0.0, 0.0]).unwrap();
            assert!(width.crossed);
            // |⟨ψ|e^{iθJx}|ψ⟩|² = cos(θ/2)^{2N} crosses 1/2 exactly at
            // 2 acos(2^{−1/(2N)}).
            let exact = 2.0 * (2.0_f64.powf(-1.0 / (2.0 * n as f64))).acos();
            assert_abs_diff_eq!(width.theta, exact, epsilon = 1e-9);
        }
    }

    #[test]
    fn axis_eigenstates_never_cross() {
        let psi = coherent_spin_state(12, 0.0, 0.0, Representation::Symmetric).unwrap();
        let width = rotation_fidelity_width(&psi, [0.0, 0.0, 1.0]).unwrap();
        assert!(!width.crossed, "a Jz eigenstate only picks up a phase under z rotations");
        assert_eq!(width.theta, PI);
    }

    #[test]
    fn chaotic_width_tracks_the_fisher_information() {
        let n = 60;
        let u = models::floquet_coe(n, 1.7, 10.0).unwrap();
        let spec = SpectralDecomposition::of_unitary(&u).unwrap();
        let psi0 =
            coherent_spin_state(n, PI / 2.0, -PI / 2.0, Representation::Symmetric).unwrap();
        let psi = evolve(&psi0, &spec, 500.0).unwrap();
        let ops = build_collective_ops(n, Representation::Symmetric).unwrap();
        let qfi = crate::dynamics::qfi_pure(&psi, &ops.jz).unwrap();
        let width = rotation_fidelity_width(&psi, [0.0, 0.0, 1.0]).unwrap();
        assert!(width.crossed);
        let gaussian = 2.0 * (2.0_f64.ln() / qfi).sqrt();
        assert!(
            (width.theta - gaussian).abs() < 0.25 * gaussian,
            "width {} vs Gaussian estimate {}",
            width.theta,
            gaussian
        );
    }

    #[test]
    fn moments_reject_oversized_and_foreign_states() {
        let psi = coherent_spin_state(201, 0.1, 0.2, Representation::Symmetric);
        // Building the state itself is fine; the moments must refuse.
        let err = WignerMoments::of_state(&psi.unwrap()).unwrap_err();
        assert!(matches!(err, Error::Capacity(_)));

        let full = coherent_spin_state(4, 0.1, 0.2, Representation::Full).unwrap();
        assert!(matches!(WignerMoments::of_state(&full), Err(Error::BasisMismatch(_))));

        let sym = coherent_spin_state(4, 0.1, 0.2, Representation::Symmetric).unwrap();
        assert!(matches!(wigner_grid(&sym, 32, 96), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn monopole_moment_is_fixed_by_normalization() {
        for &n in &[3_usize, 8, 41] {
            let psi =
                coherent_spin_state(n, 1.0, 2.0, Representation::Symmetric).unwrap();
            let moments = WignerMoments::of_state(&psi).unwrap();
            assert_abs_diff_eq!(
                moments.monopole(),
                1.0 / ((n + 1) as f64).sqrt(),
                epsilon = 1e-12
            );
        }
    }
}
