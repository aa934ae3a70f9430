//! Time evolution and the quantum Fisher information diagnostics.
//!
//! For a pure state the quantum Fisher information with respect to a
//! Hermitian generator `O` is four times the variance,
//! `F = 4 (⟨O²⟩ − ⟨O⟩²)`. Chaotic dynamics spread an initially
//! localized state over the whole accessible eigenbasis, so the time
//! average of `F` saturates at a value fixed by dimension counting
//! alone; integrable dynamics saturate lower. Everything here serves
//! that comparison:
//!
//! - exact spectral decompositions of Hamiltonians and one-kick Floquet
//!   unitaries (quasi-energies `E = −arg(e^{iθ})` on `(−π, π]`),
//! - evolution and QFI traces over configurable time windows,
//! - a plateau detector for the saturation time,
//! - the fidelity out-of-time-order correlator whose small-angle
//!   curvature reproduces the QFI,
//! - Krylov chains that measure the dynamically accessible dimension,
//! - a growth-rate fit for exponential early-time QFI.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::spin::{BasisDescriptor, Operator, OperatorKind, StateVector};
use crate::tol;

/// Stroboscopic averaging window used throughout: late enough that the
/// plateau has formed for every model size studied here, long enough to
/// beat the plateau's own fluctuations.
pub const DEFAULT_KICK_WINDOW: (u64, u64) = (200, 2000);

/// Whether eigenvalues are energies or Floquet quasi-energies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectralKind {
    Hamiltonian,
    Floquet,
}

/// An exact eigendecomposition, the workhorse behind all evolution.
///
/// `values` are ascending. For Floquet operators they are quasi-energies
/// in `(−π, π]` defined by `U = V diag(e^{−iE}) V†`, so evolution over
/// `t` kicks multiplies overlaps by `e^{−iEt}` exactly like a
/// Hamiltonian would.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMat,
    pub basis: BasisDescriptor,
    pub kind: SpectralKind,
}

impl SpectralDecomposition {
    /// Decomposes either operator kind.
    pub fn of_operator(op: &Operator) -> Result<Self> {
        match op.kind {
            OperatorKind::Hermitian => Self::of_hermitian(op),
            OperatorKind::Unitary => Self::of_unitary(op),
        }
    }

    pub fn of_hermitian(op: &Operator) -> Result<Self> {
        if op.kind != OperatorKind::Hermitian {
            return Err(Error::invalid("of_hermitian needs a Hermitian operator"));
        }
        let (values, vectors) = linalg::hermitian_eigen(&op.matrix)?;
        Ok(Self { values, vectors, basis: op.basis.clone(), kind: SpectralKind::Hamiltonian })
    }

    pub fn of_unitary(op: &Operator) -> Result<Self> {
        if op.kind != OperatorKind::Unitary {
            return Err(Error::invalid("of_unitary needs a unitary operator"));
        }
        let (phases, vectors) = linalg::unitary_eigen(&op.matrix)?;
        // Quasi-energy E = −θ, folded so the boundary value stays at +π.
        let mut values: Vec<f64> = phases.iter().map(|&t| if t >= std::f64::consts::PI { std::f64::consts::PI } else { -t }).collect();
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let mut sorted_vectors = CMat::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            sorted_vectors.set_column(dst, &vectors.column(src));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values, vectors: sorted_vectors, basis: op.basis.clone(), kind: SpectralKind::Floquet })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenbasis overlaps `V† ψ`.
    pub fn overlaps(&self, state: &StateVector) -> Result<CVec> {
        if !self.basis.compatible(&state.basis) {
            return Err(Error::basis("overlaps: state lives in a different basis"));
        }
        Ok(self.vectors.adjoint() * &state.amplitudes)
    }

    /// Frobenius residual of rebuilding the original operator.
    pub fn reconstruction_error(&self, op: &Operator) -> f64 {
        let f: Box<dyn Fn(f64) -> C64> = match self.kind {
            SpectralKind::Hamiltonian => Box::new(|x| C64::new(x, 0.0)),
            SpectralKind::Floquet => Box::new(|e| C64::from_polar(1.0, -e)),
        };
        linalg::reconstruction_error(&op.matrix, &self.values, &self.vectors, f)
    }
}

/// Overlap amplitudes advanced to time `t` and mapped back to the
/// computational basis. The caller owns normalization checks.
fn evolved_amplitudes(spec: &SpectralDecomposition, overlaps: &CVec, t: f64) -> CVec {
    let mut advanced = overlaps.clone();
    for (k, &e) in spec.values.iter().enumerate() {
        advanced[k] *= C64::from_polar(1.0, -e * t);
    }
    &spec.vectors * advanced
}

/// Evolves a state to time `t` (kick count for Floquet systems).
pub fn evolve(state: &StateVector, spec: &SpectralDecomposition, t: f64) -> Result<StateVector> {
    let overlaps = spec.overlaps(state)?;
    let amps = evolved_amplitudes(spec, &overlaps, t);
    StateVector::renormalized(amps, spec.basis.clone(), tol::EVOLVED_NORM_TOL)
}

/// QFI of a pure state, `4 (⟨O²⟩ − ⟨O⟩²)`, clamped at zero so roundoff
/// on eigenstates cannot go negative.
pub fn qfi_pure(state: &StateVector, op: &Operator) -> Result<f64> {
    if op.kind != OperatorKind::Hermitian {
        return Err(Error::invalid("QFI needs a Hermitian generator"));
    }
    if !op.basis.compatible(&state.basis) {
        return Err(Error::basis("qfi_pure: state lives in a different basis"));
    }
    Ok(qfi_from_amplitudes(&op.matrix, &state.amplitudes))
}

fn qfi_from_amplitudes(matrix: &CMat, amps: &CVec) -> f64 {
    let applied = matrix * amps;
    let mean = amps.dotc(&applied).re;
    let second = applied.norm_squared();
    (4.0 * (second - mean * mean)).max(0.0)
}

/// How sample times are laid out inside an averaging window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SamplingGrid {
    /// Every integer kick in the window (Floquet systems).
    Stroboscopic,
    /// A fixed number of evenly spaced samples, endpoints included.
    Uniform(usize),
}

/// A time window plus its sampling rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragingWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub grid: SamplingGrid,
}

impl AveragingWindow {
    /// Every integer kick in `[start, end]`.
    pub fn kicks(start: u64, end: u64) -> Self {
        Self { t_start: start as f64, t_end: end as f64, grid: SamplingGrid::Stroboscopic }
    }

    /// `samples` evenly spaced times in `[t_start, t_end]`.
    pub fn uniform(t_start: f64, t_end: f64, samples: usize) -> Self {
        Self { t_start, t_end, grid: SamplingGrid::Uniform(samples) }
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        if !(self.t_start.is_finite() && self.t_end.is_finite()) || self.t_end <= self.t_start {
            return Err(Error::invalid(format!(
                "empty averaging window [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        match self.grid {
            SamplingGrid::Stroboscopic => {
                let first = self.t_start.ceil() as i64;
                let last = self.t_end.floor() as i64;
                if last < first {
                    return Err(Error::invalid("window contains no integer kick"));
                }
                Ok((first..=last).map(|k| k as f64).collect())
            }
            SamplingGrid::Uniform(samples) => {
                if samples < 2 {
                    return Err(Error::invalid("uniform sampling needs at least two samples"));
                }
                let dt = (self.t_end - self.t_start) / (samples - 1) as f64;
                Ok((0..samples).map(|k| self.t_start + k as f64 * dt).collect())
            }
        }
    }
}

/// A QFI time series for one or more generators over a common grid.
#[derive(Clone, Debug)]
pub struct QfiTrace {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// `series[op][time]`.
    pub series: Vec<Vec<f64>>,
    /// The averaging window the trace was produced for, if any.
    pub window: Option<(f64, f64)>,
    /// Estimated saturation time, when a plateau detector has run.
    pub t_star: Option<f64>,
}

impl QfiTrace {
    /// CSV with header `time,qfi_<label>,...`, one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time");
        for label in &self.labels {
            out.push_str(",qfi_");
            out.push_str(label);
        }
        out.push('\n');
        for (i, &t) in self.times.iter().enumerate() {
            out.push_str(&format!("{t:.12e}"));
            for series in &self.series {
                out.push_str(&format!(",{:.12e}", series[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// A trace together with its per-generator window statistics.
#[derive(Clone, Debug)]
pub struct QfiAverage {
    pub trace: QfiTrace,
    /// Mean over the sampled window, one entry per generator.
    pub mean: Vec<f64>,
    /// Population standard deviation over the sampled window.
    pub std: Vec<f64>,
}

/// Computes QFI for each labeled generator at each time.
///
/// The state is decomposed once; each sample is two dense mat-vecs per
/// generator, parallelized over times with a deterministic reduction.
pub fn qfi_trace(
    state: &StateVector,
    spec: &SpectralDecomposition,
    generators: &[(&str, &Operator)],
    times: Vec<f64>,
) -> Result<QfiTrace> {
    for (_, op) in generators {
        if op.kind != OperatorKind::Hermitian {
            return Err(Error::invalid("QFI needs Hermitian generators"));
        }
        if !op.basis.compatible(&spec.basis) {
            return Err(Error::basis("qfi_trace: generator lives in a different basis"));
        }
    }
    let overlaps = spec.overlaps(state)?;
    let per_time: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            let amps = evolved_amplitudes(spec, &overlaps, t);
            generators.iter().map(|(_, op)| qfi_from_amplitudes(&op.matrix, &amps)).collect()
        })
        .collect();
    let mut series = vec![Vec::with_capacity(times.len()); generators.len()];
    for row in &per_time {
        for (k, &v) in row.iter().enumerate() {
            series[k].push(v);
        }
    }
    Ok(QfiTrace {
        times,
        labels: generators.iter().map(|(l, _)| l.to_string()).collect(),
        series,
        window: None,
        t_star: None,
    })
}

/// Time-averaged QFI over a window: mean and spread per generator.
pub fn time_averaged_qfi(
    state: &StateVector,
    spec: &SpectralDecomposition,
    generators: &[(&str, &Operator)],
    window: &AveragingWindow,
) -> Result<QfiAverage> {
    let times = window.times()?;
    let mut trace = qfi_trace(state, spec, generators, times)?;
    trace.window = Some((window.t_start, window.t_end));
    let mut mean = Vec::with_capacity(generators.len());
    let mut std = Vec::with_capacity(generators.len());
    for series in &trace.series {
        let n = series.len() as f64;
        let m = series.iter().sum::<f64>() / n;
        let var = series.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
        mean.push(m);
        std.push(var.sqrt());
    }
    Ok(QfiAverage { trace, mean, std })
}

/// Earliest time after which the running mean is stable: at index `i`
/// the mean over the first half of the remaining samples is compared
/// with the mean over all of them, and `i` is accepted once they agree
/// to 5%. Returns `None` when no suffix of the series is stable (for
/// example while the QFI is still growing).
pub fn estimate_t_star(times: &[f64], values: &[f64]) -> Option<f64> {
    assert_eq!(times.len(), values.len(), "estimate_t_star: length mismatch");
    let len = times.len();
    if len < 8 {
        return None;
    }
    for i in 0..len {
        let w = (len - i) / 2;
        if w < 4 {
            break;
        }
        let half: f64 = values[i..i + w].iter().sum::<f64>() / w as f64;
        let full: f64 = values[i..].iter().sum::<f64>() / (len - i) as f64;
        if (full - half).abs() <= 0.05 * full.abs() {
            return Some(times[i]);
        }
    }
    None
}

/// Spectral weights of the evolved state on the generator's eigenbasis;
/// the fidelity OTOC is their characteristic function.
fn otoc_weights(
    state: &StateVector,
    spec: &SpectralDecomposition,
    op: &Operator,
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if op.kind != OperatorKind::Hermitian {
        return Err(Error::invalid("the fidelity OTOC needs a Hermitian generator"));
    }
    if !op.basis.compatible(&spec.basis) {
        return Err(Error::basis("fidelity_otoc: generator lives in a different basis"));
    }
    let evolved = evolve(state, spec, t)?;
    let (values, vectors) = linalg::hermitian_eigen(&op.matrix)?;
    let coeffs = vectors.adjoint() * &evolved.amplitudes;
    let weights: Vec<f64> = coeffs.iter().map(|c| c.norm_sqr()).collect();
    Ok((values, weights))
}

fn characteristic(values: &[f64], weights: &[f64], theta: f64) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for (&v, &w) in values.iter().zip(weights.iter()) {
        acc += C64::from_polar(w, theta * v);
    }
    acc.norm_sqr()
}

/// Fidelity out-of-time-order correlator
/// `F(θ) = |⟨ψ(t)| e^{iθO} |ψ(t)⟩|²`.
pub fn fidelity_otoc(
    state: &StateVector,
    spec: &SpectralDecomposition,
    op: &Operator,
    theta: f64,
    t: f64,
) -> Result<f64> {
    let (values, weights) = otoc_weights(state, spec, op, t)?;
    Ok(characteristic(&values, &weights, theta))
}

/// QFI estimated from the OTOC's curvature at the origin,
/// `−2 [F(θ) − 2F(0) + F(−θ)] / θ²`. Agrees with [`qfi_pure`] up to
/// `O(θ²)` truncation error.
pub fn qfi_from_otoc_curvature(
    state: &StateVector,
    spec: &SpectralDecomposition,
    op: &Operator,
    theta: f64,
    t: f64,
) -> Result<f64> {
    if theta == 0.0 {
        return Err(Error::invalid("curvature estimate needs a nonzero angle"));
    }
    let (values, weights) = otoc_weights(state, spec, op, t)?;
    let plus = characteristic(&values, &weights, theta);
    let zero = characteristic(&values, &weights, 0.0);
    let minus = characteristic(&values, &weights, -theta);
    Ok(-2.0 * (plus - 2.0 * zero + minus) / (theta * theta))
}

/// Dimension of the Krylov space generated from `state` by repeated
/// application of the operator (Hamiltonian or Floquet unitary alike).
///
/// Arnoldi with two rounds of Gram-Schmidt per step; the chain stops
/// when the residual drops below `tol` relative to the pre-orthogonalized
/// vector. The result counts the distinct eigenspaces the state touches,
/// so exactly degenerate levels (Kramers doublets) count once.
pub fn krylov_dimension(op: &Operator, state: &StateVector, tol: f64) -> Result<usize> {
    if !op.basis.compatible(&state.basis) {
        return Err(Error::basis("krylov_dimension: state lives in a different basis"));
    }
    let dim = op.dim();
    let mut basis: Vec<CVec> = vec![state.amplitudes.clone()];
    loop {
        let raw = &op.matrix * basis.last().expect("chain never empty");
        let scale = raw.norm();
        if scale == 0.0 {
            return Ok(basis.len());
        }
        let mut w = raw;
        // Two rounds of full Gram-Schmidt keep the chain orthonormal even
        // when the new direction is nearly exhausted.
        for _ in 0..2 {
            for v in &basis {
                let c = v.dotc(&w);
                w -= v.map(|z| z * c);
            }
        }
        let residual = w.norm();
        if residual <= tol * scale {
            return Ok(basis.len());
        }
        if basis.len() == dim {
            return Ok(dim);
        }
        w /= C64::new(residual, 0.0);
        basis.push(w);
    }
}

/// Same count, from a spectral decomposition: eigenvalues are clustered
/// within [`tol::DEGENERACY_MERGE_TOL`] and a cluster counts when the
/// state's weight on it exceeds `weight_tol`. Serves as the independent
/// cross-check on [`krylov_dimension`].
pub fn krylov_dimension_spectral(
    spec: &SpectralDecomposition,
    state: &StateVector,
    weight_tol: f64,
) -> Result<usize> {
    let overlaps = spec.overlaps(state)?;
    let weights: Vec<f64> = overlaps.iter().map(|c| c.norm_sqr()).collect();
    let mut count = 0usize;
    let mut i = 0usize;
    let n = spec.values.len();
    while i < n {
        let mut j = i + 1;
        let mut cluster_weight = weights[i];
        while j < n && spec.values[j] - spec.values[j - 1] < tol::DEGENERACY_MERGE_TOL {
            cluster_weight += weights[j];
            j += 1;
        }
        if cluster_weight > weight_tol {
            count += 1;
        }
        i = j;
    }
    Ok(count)
}

/// Least-squares exponential growth rate of the early-time QFI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rate: f64,
    pub ln_prefactor: f64,
    pub t_window: (f64, f64),
    pub points: usize,
}

/// Fits `ln v = ln c + r t` over the contiguous run of samples between
/// the first crossing of `lo` and the first value above `hi`. Returns
/// `None` when fewer than four samples land in the band.
pub fn fit_exponential_rate(times: &[f64], values: &[f64], lo: f64, hi: f64) -> Option<RateFit> {
    assert_eq!(times.len(), values.len(), "fit_exponential_rate: length mismatch");
    assert!(lo > 0.0 && hi > lo, "fit band must satisfy 0 < lo < hi");
    let start = values.iter().position(|&v| v >= lo)?;
    let mut end = start;
    while end < values.len() && values[end] <= hi {
        end += 1;
    }
    let n = end - start;
    if n < 4 {
        return None;
    }
    let ts = &times[start..end];
    let vs = &values[start..end];
    let mean_t: f64 = ts.iter().sum::<f64>() / n as f64;
    let mean_ln: f64 = vs.iter().map(|v| v.ln()).sum::<f64>() / n as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, v) in ts.iter().zip(vs.iter()) {
        num += (t - mean_t) * (v.ln() - mean_ln);
        den += (t - mean_t) * (t - mean_t);
    }
    if den == 0.0 {
        return None;
    }
    let rate = num / den;
    Some(RateFit {
        rate,
        ln_prefactor: mean_ln - rate * mean_t,
        t_window: (ts[0], ts[n - 1]),
        points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::spin::{
        build_collective_ops, coherent_spin_state, symmetry_sector, Representation, SectorParity,
        SymmetryKind,
    };
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn css_minus_y(n: usize) -> StateVector {
        coherent_spin_state(n, PI / 2.0, -PI / 2.0, Representation::Symmetric).unwrap()
    }

    #[test]
    fn floquet_decomposition_reconstructs_the_unitary() {
        let u = models::floquet_coe(20, 1.7, 10.0).unwrap();
        let spec = SpectralDecomposition::of_unitary(&u).unwrap();
        assert!(spec.values.windows(2).all(|w| w[0] <= w[1]));
        assert!(spec.values.iter().all(|e| (-PI..=PI).contains(e)));
        let err = spec.reconstruction_error(&u);
        assert!(err < 1e-10 * 21.0, "residual {err}");
    }

    #[test]
    fn eigenstates_only_pick_up_phases() {
        let h = models::lmg_hamiltonian(6, 1.0, 1.0).unwrap();
        let spec = SpectralDecomposition::of_hermitian(&h).unwrap();
        let k = 3;
        let psi = StateVector::new(spec.vectors.column(k).clone_owned(), h.basis.clone()).unwrap();
        let t = 2.7;
        let evolved = evolve(&psi, &spec, t).unwrap();
        let phase = C64::from_polar(1.0, -spec.values[k] * t);
        let diff: f64 = (0..7).map(|i| (evolved.amplitudes[i] - psi.amplitudes[i] * phase).norm()).sum();
        assert!(diff < 1e-10, "phase mismatch {diff}");
    }

    #[test]
    fn kick_evolution_matches_direct_matrix_powers() {
        let u = models::floquet_coe(8, 1.7, 10.0).unwrap();
        let spec = SpectralDecomposition::of_unitary(&u).unwrap();
        let psi = css_minus_y(8);
        let mut direct = psi.amplitudes.clone();
        for _ in 0..3 {
            direct = &u.matrix * direct;
        }
        let evolved = evolve(&psi, &spec, 3.0).unwrap();
        let diff = (&evolved.amplitudes - direct).norm();
        assert!(diff < 1e-10, "kick mismatch {diff}");
    }

    #[test]
    fn qfi_of_coherent_states_matches_spin_variances() {
        let n = 6;
        for rep in [Representation::Symmetric, Representation::Full] {
            let ops = build_collective_ops(n, rep).unwrap();
            let up = coherent_spin_state(n, 0.0, 0.0, rep).unwrap();
            assert_abs_diff_eq!(qfi_pure(&up, &ops.jz).unwrap(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(qfi_pure(&up, &ops.jx).unwrap(), n as f64, epsilon = 1e-10);
            assert_abs_diff_eq!(qfi_pure(&up, &ops.jy).unwrap(), n as f64, epsilon = 1e-10);
        }
        // The GHZ superposition of the two poles reaches the Heisenberg
        // value 4 Var Jz = N².
        let ops = build_collective_ops(n, Representation::Symmetric).unwrap();
        let mut amps = CVec::zeros(n + 1);
        amps[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[n] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let ghz = StateVector::new(amps, BasisDescriptor::symmetric(n)).unwrap();
        assert_abs_diff_eq!(qfi_pure(&ghz, &ops.jz).unwrap(), (n * n) as f64, epsilon = 1e-10);
    }

    #[test]
    fn qfi_is_additive_over_product_states() {
        // Two 2-spin blocks in a 4-spin register: F[Jz] must add.
        let a = coherent_spin_state(2, 0.9, 0.3, Representation::Full).unwrap();
        let b = coherent_spin_state(2, 2.1, -1.0, Representation::Full).unwrap();
        let mut amps = CVec::zeros(16);
        for i in 0..4 {
            for j in 0..4 {
                amps[(i << 2) | j] = a.amplitudes[i] * b.amplitudes[j];
            }
        }
        let product = StateVector::new(amps, BasisDescriptor::full(4)).unwrap();
        let jz4 = crate::spin::collective_op(4, crate::spin::Axis::Z, Representation::Full).unwrap();
        let jz2 = crate::spin::collective_op(2, crate::spin::Axis::Z, Representation::Full).unwrap();
        let total = qfi_pure(&product, &jz4).unwrap();
        let parts = qfi_pure(&a, &jz2).unwrap() + qfi_pure(&b, &jz2).unwrap();
        assert_abs_diff_eq!(total, parts, epsilon = 1e-9);
    }

    #[test]
    fn otoc_curvature_reproduces_the_qfi() {
        let n = 30;
        let u = models::floquet_coe(n, 1.7, 10.0).unwrap();
        let spec = SpectralDecomposition::of_unitary(&u).unwrap();
        let ops = build_collective_ops(n, Representation::Symmetric).unwrap();
        let psi = css_minus_y(n);
        let t = 300.0;
        let evolved = evolve(&psi, &spec, t).unwrap();
        let exact = qfi_pure(&evolved, &ops.jz).unwrap();
        let estimate = qfi_from_otoc_curvature(&psi, &spec, &ops.jz, 1e-3, t).unwrap();
        assert!(
            (estimate - exact).abs() <= 1e-3 * exact.abs(),
            "curvature {estimate} vs exact {exact}"
        );
        // And the OTOC itself is a fidelity: F(0) = 1.
        let f0 = fidelity_otoc(&psi, &spec, &ops.jz, 0.0, t).unwrap();
        assert_abs_diff_eq!(f0, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn krylov_chain_spans_the_full_multiplet_for_a_chaotic_top() {
        let n = 10;
        let u = models::floquet_coe(n, 1.7, 10.0).unwrap();
        let psi = css_minus_y(n);
        let k = krylov_dimension(&u, &psi, tol::KRYLOV_RESIDUAL_TOL).unwrap();
        assert_eq!(k, n + 1);

        // An eigenstate generates a one-dimensional chain.
        let spec = SpectralDecomposition::of_unitary(&u).unwrap();
        let eigen = StateVector::renormalized(
            spec.vectors.column(4).clone_owned(),
            u.basis.clone(),
            1e-8,
        )
        .unwrap();
        assert_eq!(krylov_dimension(&u, &eigen, tol::KRYLOV_RESIDUAL_TOL).unwrap(), 1);
    }

    #[test]
    fn krylov_chain_agrees_with_spectral_overlap_count() {
        // Chain Hamiltonian restricted to its reflection-even sector.
        let h = models::ising_hamiltonian(6, 1.0, 1.0, 1.0).unwrap();
        let (block, proj) = symmetry_sector(&h, SymmetryKind::BitReversal, SectorParity::Even).unwrap();
        let up = coherent_spin_state(6, 0.0, 0.0, Representation::Full).unwrap();
        let up_sector = proj.project_state(&up).unwrap();
        let arnoldi = krylov_dimension(&block, &up_sector, tol::KRYLOV_RESIDUAL_TOL).unwrap();
        let spec = SpectralDecomposition::of_hermitian(&block).unwrap();
        let spectral = krylov_dimension_spectral(&spec, &up_sector, 1e-12).unwrap();
        assert_eq!(arnoldi, spectral);
        assert!(arnoldi > 1, "chain should explore many levels, got {arnoldi}");

        // Chaotic top from a generic state: both routes count N + 1.
        let n = 16;
        let u = models::floquet_coe(n, 1.7, 10.0).unwrap();
        let psi = css_minus_y(n);
        let spec = SpectralDecomposition::of_unitary(&u).unwrap();
        assert_eq!(krylov_dimension(&u, &psi, tol::KRYLOV_RESIDUAL_TOL).unwrap(), n + 1);
        assert_eq!(krylov_dimension_spectral(&spec, &psi, 1e-12).unwrap(), n + 1);
    }

    #[test]
    fn kramers_doublets_count_once_in_the_krylov_chain() {
        let n = 9;
        let u = models::floquet_cse(n, [2.5, 2.5, 5.0, 7.5]).unwrap();
        let psi = css_minus_y(n);
        let arnoldi = krylov_dimension(&u, &psi, tol::KRYLOV_RESIDUAL_TOL).unwrap();
        let spec = SpectralDecomposition::of_unitary(&u).unwrap();
        let spectral = krylov_dimension_spectral(&spec, &psi, 1e-12).unwrap();
        // (N+1)/2 doublets, each contributing a single direction.
        assert_eq!(arnoldi, (n + 1) / 2);
        assert_eq!(spectral, (n + 1) / 2);
    }

    #[test]
    fn plateau_detector_finds_the_saturation_time() {
        let times: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let values: Vec<f64> = times
            .iter()
            .map(|&t| if t < 30.0 { t / 30.0 } else { 1.0 + 0.01 * (0.5 * t).sin() })
            .collect();
        // The detector reports the earliest stable suffix; for this ramp
        // anything up to just past the corner is acceptable.
        let t_star = estimate_t_star(&times, &values).unwrap();
        assert!((0.0..=40.0).contains(&t_star), "t* = {t_star}");

        // Pure growth never stabilizes.
        let growing: Vec<f64> = times.iter().map(|&t| (0.05 * t).exp()).collect();
        assert_eq!(estimate_t_star(&times, &growing), None);

        // A constant series is stable from the first sample.
        let flat = vec![2.0; 200];
        assert_eq!(estimate_t_star(&times, &flat), Some(0.0));
    }

    #[test]
    fn stationary_states_have_flat_qfi_traces() {
        let n = 12;
        let u = models::floquet_coe(n, 1.7, 10.0).unwrap();
        let spec = SpectralDecomposition::of_unitary(&u).unwrap();
        let ops = build_collective_ops(n, Representation::Symmetric).unwrap();
        let eigen = StateVector::renormalized(
            spec.vectors.column(2).clone_owned(),
            u.basis.clone(),
            1e-8,
        )
        .unwrap();
        let window = AveragingWindow::kicks(10, 60);
        let avg = time_averaged_qfi(&eigen, &spec, &[("z", &ops.jz)], &window).unwrap();
        let reference = qfi_pure(&eigen, &ops.jz).unwrap();
        assert_abs_diff_eq!(avg.mean[0], reference, epsilon = 1e-8);
        assert!(avg.std[0] < 1e-8, "eigenstate QFI should not fluctuate");
    }

    #[test]
    fn window_average_is_insensitive_to_sampling_density() {
        let n = 40;
        let h = models::lmg_hamiltonian(n, 1.0, 1.0).unwrap();
        let spec = SpectralDecomposition::of_hermitian(&h).unwrap();
        let ops = build_collective_ops(n, Representation::Symmetric).unwrap();
        let psi = coherent_spin_state(n, PI, 0.0, Representation::Symmetric).unwrap();
        let coarse = time_averaged_qfi(
            &psi,
            &spec,
            &[("z", &ops.jz)],
            &AveragingWindow::uniform(4.0, 12.0, 300),
        )
        .unwrap();
        let fine = time_averaged_qfi(
            &psi,
            &spec,
            &[("z", &ops.jz)],
            &AveragingWindow::uniform(4.0, 12.0, 600),
        )
        .unwrap();
        let rel = (coarse.mean[0] - fine.mean[0]).abs() / fine.mean[0];
        assert!(rel < 5e-3, "density sensitivity {rel}");
    }

    #[test]
    fn averaging_windows_validate_their_bounds() {
        assert!(AveragingWindow::uniform(3.0, 3.0, 10).times().is_err());
        assert!(AveragingWindow::uniform(0.0, 1.0, 1).times().is_err());
        assert!(AveragingWindow::kicks(5, 4).times().is_err());
        let kicks = AveragingWindow::kicks(2, 5).times().unwrap();
        assert_eq!(kicks, vec![2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn rate_fit_recovers_a_synthetic_exponential() {
        let times: Vec<f64> = (0..500).map(|i| i as f64 * 0.01).collect();
        let values: Vec<f64> = times.iter().map(|&t| 0.3 * (1.8 * t).exp()).collect();
        let fit = fit_exponential_rate(&times, &values, 1.0, 20.0).unwrap();
        assert_abs_diff_eq!(fit.rate, 1.8, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.ln_prefactor, 0.3_f64.ln(), epsilon = 1e-9);
        assert!(fit.points > 100);
        // A band no sample reaches yields no fit.
        assert!(fit_exponential_rate(&times, &values, 1e6, 1e7).is_none());
    }

    #[test]
    fn qfi_trace_serializes_with_labeled_header() {
        let trace = QfiTrace {
            times: vec![0.0, 1.0],
            labels: vec!["x".into(), "y".into(), "z".into()],
            series: vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            window: None,
            t_star: None,
        };
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "time,qfi_x,qfi_y,qfi_z");
        assert_eq!(csv.lines().count(), 3);
    }
}
