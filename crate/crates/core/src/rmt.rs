//! Random-matrix reference statistics and Haar-random state sampling.
//!
//! Level spacing distributions separate the three classical symmetry
//! classes through their Wigner surmises (unit mean spacing `S`):
//!
//! ```text
//! orthogonal  P(S) = (π/2) S exp(−π S²/4)
//! unitary     P(S) = (32/π²) S² exp(−4 S²/π)
//! symplectic  P(S) = (2¹⁸/(3⁶ π³)) S⁴ exp(−64 S²/(9π))
//! ```
//!
//! Their cumulative distributions are closed forms in `erf`, so
//! Kolmogorov-Smirnov distances need no quadrature. Floquet spectra are
//! uniformly dense on the circle and need no unfolding beyond the exact
//! circular gaps; Hamiltonian spectra are unfolded with a polynomial
//! fit to the spectral staircase.
//!
//! The sampling side draws Haar-random states: a random real ray for
//! the orthogonal class, a random complex ray for the unitary class,
//! and the symplectic recipe that fills the amplitudes from pairs of
//! real Gaussians, which as a distribution over rays coincides with the
//! unitary one. Monte Carlo QFI averages over such states are sharded
//! deterministically, so results are bit-reproducible at any thread
//! count.

use std::str::FromStr;

use num_complex::Complex64 as C64;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{SpectralDecomposition, SpectralKind};
use crate::error::{Error, Result};
use crate::linalg::CVec;
use crate::spin::{BasisDescriptor, Operator, OperatorKind, StateVector};
use crate::tol;

/// Number of independent RNG streams a Monte Carlo average is split
/// into. Fixed so the sample set depends only on the seed, never on
/// the thread count.
const MC_SHARDS: usize = 64;

/// The three classical symmetry classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Coe,
    Cue,
    Cse,
}

impl Ensemble {
    pub const ALL: [Ensemble; 3] = [Ensemble::Coe, Ensemble::Cue, Ensemble::Cse];

    /// Dyson index.
    pub fn beta(&self) -> u8 {
        match self {
            Ensemble::Coe => 1,
            Ensemble::Cue => 2,
            Ensemble::Cse => 4,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Ensemble::Coe => "coe",
            Ensemble::Cue => "cue",
            Ensemble::Cse => "cse",
        }
    }

    /// Wigner surmise density at unit mean spacing.
    pub fn surmise_pdf(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        use std::f64::consts::PI;
        match self {
            Ensemble::Coe => 0.5 * PI * s * (-0.25 * PI * s * s).exp(),
            Ensemble::Cue => 32.0 / (PI * PI) * s * s * (-4.0 / PI * s * s).exp(),
            Ensemble::Cse => {
                let c4 = 262144.0 / (729.0 * PI.powi(3));
                let b = 64.0 / (9.0 * PI);
                c4 * s.powi(4) * (-b * s * s).exp()
            }
        }
    }

    /// Closed-form cumulative of the surmise.
    pub fn surmise_cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        use std::f64::consts::PI;
        match self {
            Ensemble::Coe => 1.0 - (-0.25 * PI * s * s).exp(),
            Ensemble::Cue => {
                let a = 4.0 / PI;
                libm::erf(2.0 * s / PI.sqrt()) - a * s * (-a * s * s).exp()
            }
            Ensemble::Cse => {
                let b = 64.0 / (9.0 * PI);
                let c4 = 262144.0 / (729.0 * PI.powi(3));
                libm::erf(b.sqrt() * s)
                    - c4 * (-b * s * s).exp() * (s.powi(3) / (2.0 * b) + 3.0 * s / (4.0 * b * b))
            }
        }
    }
}

impl FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "coe" => Ok(Ensemble::Coe),
            "cue" => Ok(Ensemble::Cue),
            "cse" => Ok(Ensemble::Cse),
            other => Err(Error::invalid(format!("unknown ensemble '{other}' (coe|cue|cse)"))),
        }
    }
}

/// A set of level spacings normalized to unit mean.
#[derive(Clone, Debug)]
pub struct SpacingSample {
    pub spacings: Vec<f64>,
}

impl SpacingSample {
    /// Wraps spacings that are already normalized.
    pub fn new(spacings: Vec<f64>) -> Result<Self> {
        if spacings.is_empty() {
            return Err(Error::invalid("a spacing sample cannot be empty"));
        }
        if spacings.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::numerical("spacings must be finite and nonnegative"));
        }
        let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
        if (mean - 1.0).abs() > tol::UNIT_MEAN_TOL {
            return Err(Error::structure(format!(
                "spacing sample has mean {mean:.9}, expected 1 within {:.0e}",
                tol::UNIT_MEAN_TOL
            )));
        }
        Ok(Self { spacings })
    }

    /// Normalizes raw gaps to unit mean first.
    pub fn from_raw_gaps(gaps: Vec<f64>) -> Result<Self> {
        if gaps.is_empty() {
            return Err(Error::invalid("a spacing sample cannot be empty"));
        }
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        if !(mean.is_finite() && mean > 0.0) {
            return Err(Error::numerical("raw gaps must have a positive finite mean"));
        }
        Self::new(gaps.into_iter().map(|g| g / mean).collect())
    }

    pub fn len(&self) -> usize {
        self.spacings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spacings.is_empty()
    }
}

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Spacings of Floquet quasi-energies around the circle.
///
/// Quasi-energy spectra are uniformly dense on `(−π, π]`, so the exact
/// circular gaps (including the wraparound gap) already have mean
/// `2π/K` and need no unfolding. With `kramers` set, exactly degenerate
/// doublets are merged first; the spectrum must then consist purely of
/// doublets or the symmetry assumption was wrong and an error is
/// returned.
pub fn quasi_energy_spacings(spec: &SpectralDecomposition, kramers: bool) -> Result<SpacingSample> {
    if spec.kind != SpectralKind::Floquet {
        return Err(Error::invalid("circle spacings are defined for quasi-energy spectra"));
    }
    let mut values = spec.values.clone();
    values.sort_by(f64::total_cmp);
    if values.len() < 3 {
        return Err(Error::invalid("need at least three levels for circle spacings"));
    }

    if kramers {
        values = merge_kramers_doublets(&values)?;
        if values.len() < 3 {
            return Err(Error::invalid("too few doublets for circle spacings"));
        }
    }

    let k = values.len();
    let mut gaps = Vec::with_capacity(k);
    for i in 1..k {
        gaps.push(values[i] - values[i - 1]);
    }
    gaps.push(TWO_PI - (values[k - 1] - values[0]));
    SpacingSample::from_raw_gaps(gaps)
}

/// Collapses a sorted circular spectrum of exact doublets to one
/// representative per pair, handling a pair that straddles ±π.
fn merge_kramers_doublets(values: &[f64]) -> Result<Vec<f64>> {
    let n = values.len();
    // Cluster linearly first.
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for &v in values {
        match clusters.last_mut() {
            Some(c) if v - *c.last().expect("cluster never empty") < tol::DEGENERACY_MERGE_TOL => {
                c.push(v)
            }
            _ => clusters.push(vec![v]),
        }
    }
    // A doublet split across the ±π seam shows up as two singleton
    // clusters at the ends; merge them across the wrap.
    if clusters.len() >= 2 {
        let first_lo = clusters[0][0];
        let last_hi = *clusters.last().expect("nonempty").last().expect("nonempty");
        if (first_lo + TWO_PI) - last_hi < tol::DEGENERACY_MERGE_TOL {
            let head = clusters.remove(0);
            let tail = clusters.last_mut().expect("nonempty");
            tail.extend(head.into_iter().map(|v| v + TWO_PI));
        }
    }
    let mut reps = Vec::with_capacity(clusters.len());
    for c in &clusters {
        if c.len() != 2 {
            return Err(Error::structure(format!(
                "expected Kramers doublets, found a cluster of {} level(s) near {:.6} \
                 (spectrum of {n} levels)",
                c.len(),
                c[0]
            )));
        }
        let mut rep = 0.5 * (c[0] + c[1]);
        // Fold a wrap-merged representative back into (−π, π].
        if rep > std::f64::consts::PI {
            rep -= TWO_PI;
        }
        reps.push(rep);
    }
    reps.sort_by(f64::total_cmp);
    Ok(reps)
}

/// Unfolds a Hamiltonian spectrum to unit mean spacing.
///
/// The cumulative staircase `N(E_i) = i + 1/2` is fitted with a
/// polynomial of the given degree (least squares on the interval
/// rescaled to `[−1, 1]`), spacings are differences of the fitted
/// staircase, a `trim_fraction` of levels is dropped at each spectral
/// edge where the fit is unreliable, tiny negative artifacts of the fit
/// are clamped to zero, and the result is normalized to unit mean.
pub fn unfold_spectrum(levels: &[f64], degree: usize, trim_fraction: f64) -> Result<SpacingSample> {
    if levels.len() < 50 {
        return Err(Error::invalid(format!(
            "unfolding needs at least 50 levels, got {}",
            levels.len()
        )));
    }
    if degree == 0 || degree > 30 {
        return Err(Error::invalid("unfolding degree must be in 1..=30"));
    }
    if !(0.0..=0.4).contains(&trim_fraction) {
        return Err(Error::invalid("trim fraction must be in [0, 0.4]"));
    }
    let mut sorted = levels.to_vec();
    if sorted.iter().any(|e| !e.is_finite()) {
        return Err(Error::numerical("spectrum contains non-finite levels"));
    }
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    if hi - lo <= 0.0 {
        return Err(Error::invalid("spectrum is a single point, nothing to unfold"));
    }

    // Least-squares polynomial fit of the staircase on [−1, 1].
    let xs: Vec<f64> = sorted.iter().map(|e| 2.0 * (e - lo) / (hi - lo) - 1.0).collect();
    let mut vander = nalgebra::DMatrix::<f64>::zeros(n, degree + 1);
    for (i, &x) in xs.iter().enumerate() {
        let mut p = 1.0;
        for d in 0..=degree {
            vander[(i, d)] = p;
            p *= x;
        }
    }
    let rhs = nalgebra::DVector::<f64>::from_fn(n, |i, _| i as f64 + 0.5);
    let svd = vander.svd(true, true);
    let coeffs = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::numerical(format!("staircase fit failed: {e}")))?;

    let staircase: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let mut acc = 0.0;
            let mut p = 1.0;
            for d in 0..=degree {
                acc += coeffs[d] * p;
                p *= x;
            }
            acc
        })
        .collect();

    let cut = (n as f64 * trim_fraction).floor() as usize;
    let kept = &staircase[cut..n - cut];
    if kept.len() < 2 {
        return Err(Error::invalid("trim fraction leaves fewer than two levels"));
    }
    let gaps: Vec<f64> = kept
        .windows(2)
        .map(|w| {
            let g = w[1] - w[0];
            // The fitted staircase can wiggle non-monotonically at the
            // level-spacing scale; those artifacts fold into zero-width
            // spacings rather than negative ones.
            if g < 0.0 {
                0.0
            } else {
                g
            }
        })
        .collect();
    SpacingSample::from_raw_gaps(gaps)
}

/// Kolmogorov-Smirnov distances of a spacing sample against all three
/// surmises, plus the verdict.
#[derive(Clone, Debug)]
pub struct SpacingVerdict {
    /// The class the caller expected, with its KS distance.
    pub expected: Ensemble,
    pub expected_distance: f64,
    /// The class with the smallest KS distance.
    pub best: Ensemble,
    pub distances: [(Ensemble, f64); 3],
}

/// KS distance of sorted data against a cumulative distribution.
fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut worst = 0.0_f64;
    for (i, &s) in sorted.iter().enumerate() {
        let f = cdf(s);
        worst = worst.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    worst
}

/// Tests a spacing sample against the three surmises. Needs at least
/// 200 spacings for the distances to mean anything.
pub fn spacing_test(sample: &SpacingSample, expected: Ensemble) -> Result<SpacingVerdict> {
    if sample.len() < 200 {
        return Err(Error::invalid(format!(
            "spacing test needs at least 200 spacings, got {}",
            sample.len()
        )));
    }
    let mut sorted = sample.spacings.clone();
    sorted.sort_by(f64::total_cmp);
    let distances = Ensemble::ALL.map(|e| (e, ks_distance(&sorted, |s| e.surmise_cdf(s))));
    let best = distances
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("three ensembles")
        .0;
    let expected_distance = distances
        .iter()
        .find(|(e, _)| *e == expected)
        .expect("expected ensemble present")
        .1;
    Ok(SpacingVerdict { expected, expected_distance, best, distances })
}

fn random_amplitudes(k: usize, ensemble: Ensemble, rng: &mut ChaCha12Rng) -> CVec {
    loop {
        let mut amps = CVec::zeros(k);
        match ensemble {
            // A random point on the real unit sphere.
            Ensemble::Coe => {
                for i in 0..k {
                    amps[i] = C64::new(rng.sample(StandardNormal), 0.0);
                }
            }
            // A random complex ray; the symplectic recipe draws its 2K
            // real Gaussians in pairs and lands on the same distribution.
            Ensemble::Cue | Ensemble::Cse => {
                for i in 0..k {
                    amps[i] = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                }
            }
        }
        let norm = amps.norm();
        if norm > 1e-6 {
            amps /= C64::new(norm, 0.0);
            return amps;
        }
        // Astronomically unlikely; redraw rather than divide by ~0.
    }
}

/// A Haar-random state of dimension `k`, reproducible from a seed. The
/// state is labeled with the symmetric basis of `k − 1` spins, the
/// `k`-dimensional space everything else in this crate uses.
pub fn sample_random_state(k: usize, ensemble: Ensemble, seed: u64) -> Result<StateVector> {
    if k < 2 {
        return Err(Error::invalid("random states need dimension at least 2"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let amps = random_amplitudes(k, ensemble, &mut rng);
    StateVector::new(amps, BasisDescriptor::symmetric(k - 1))
}

/// Monte Carlo average of the QFI over Haar-random states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomQfiEstimate {
    pub mean: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    pub samples: usize,
}

/// Averages `qfi_pure` over Haar-random states in the generator's own
/// space. The draw order is fixed by `seed` alone: samples are split
/// over [`MC_SHARDS`] RNG streams and merged in stream order, so the
/// estimate is identical at any thread count.
pub fn random_qfi(
    op: &Operator,
    ensemble: Ensemble,
    samples: usize,
    seed: u64,
) -> Result<RandomQfiEstimate> {
    if op.kind != OperatorKind::Hermitian {
        return Err(Error::invalid("QFI needs a Hermitian generator"));
    }
    if samples < 100 {
        return Err(Error::invalid("Monte Carlo QFI needs at least 100 samples"));
    }
    let k = op.dim();
    let per_shard = samples / MC_SHARDS;
    let remainder = samples % MC_SHARDS;

    let shard_values: Vec<Vec<f64>> = (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(shard as u64 + 1);
            let count = per_shard + usize::from(shard < remainder);
            let mut values = Vec::with_capacity(count);
            for _ in 0..count {
                let amps = random_amplitudes(k, ensemble, &mut rng);
                let applied = &op.matrix * &amps;
                let mean = amps.dotc(&applied).re;
                let second = applied.norm_squared();
                values.push((4.0 * (second - mean * mean)).max(0.0));
            }
            values
        })
        .collect();

    let mut mean = 0.0_f64;
    let mut count = 0usize;
    for shard in &shard_values {
        for &v in shard {
            mean += v;
            count += 1;
        }
    }
    assert_eq!(count, samples, "shard counts must add up");
    mean /= samples as f64;
    let mut var = 0.0_f64;
    for shard in &shard_values {
        for &v in shard {
            var += (v - mean) * (v - mean);
        }
    }
    var /= (samples - 1) as f64;
    Ok(RandomQfiEstimate { mean, std_error: (var / samples as f64).sqrt(), samples })
}

/// Exact Haar average for the generator, the analytic target of
/// [`random_qfi`] for complex (unitary-class) rays.
pub fn random_qfi_exact(op: &Operator) -> f64 {
    crate::predict::haar_average_qfi(op.dim(), op.trace_real(), op.trace_square())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SpectralDecomposition;
    use crate::models;
    use crate::spin::{collective_op, Axis, Representation};
    use approx::assert_abs_diff_eq;

    /// Simpson quadrature on [0, hi].
    fn simpson(f: impl Fn(f64) -> f64, hi: f64, intervals: usize) -> f64 {
        assert!(intervals % 2 == 0);
        let h = hi / intervals as f64;
        let mut acc = f(0.0) + f(hi);
        for i in 1..intervals {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn surmises_are_normalized_with_unit_mean() {
        for e in Ensemble::ALL {
            let norm = simpson(|s| e.surmise_pdf(s), 12.0, 1 << 14);
            let mean = simpson(|s| s * e.surmise_pdf(s), 12.0, 1 << 14);
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-8);
            assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn closed_form_cdfs_match_quadrature() {
        for e in Ensemble::ALL {
            for s in [0.3, 0.7, 1.0, 1.9, 3.3] {
                let by_quadrature = simpson(|x| e.surmise_pdf(x), s, 1 << 12);
                assert_abs_diff_eq!(e.surmise_cdf(s), by_quadrature, epsilon = 1e-9);
            }
            assert_eq!(e.surmise_cdf(0.0), 0.0);
            assert_abs_diff_eq!(e.surmise_cdf(30.0), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn orthogonal_surmise_closed_forms_at_unit_spacing() {
        use std::f64::consts::PI;
        let pdf = Ensemble::Coe.surmise_pdf(1.0);
        assert_abs_diff_eq!(pdf, 0.5 * PI * (-0.25 * PI).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(pdf, 0.716186, epsilon = 1e-6);
        let cdf = Ensemble::Coe.surmise_cdf(1.0);
        assert_abs_diff_eq!(cdf, 1.0 - (-0.25 * PI).exp(), epsilon = 1e-15);
    }

    /// Quantile function by bisection; exact construction of a sample
    /// that follows a surmise perfectly.
    fn quantile_sample(e: Ensemble, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let u = (i as f64 + 0.5) / n as f64;
                let (mut lo, mut hi) = (0.0_f64, 20.0_f64);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if e.surmise_cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }

    #[test]
    fn quantile_samples_are_assigned_to_their_own_class() {
        for e in Ensemble::ALL {
            let sample = SpacingSample::from_raw_gaps(quantile_sample(e, 4000)).unwrap();
            let verdict = spacing_test(&sample, e).unwrap();
            assert_eq!(verdict.best, e, "distances {:?}", verdict.distances);
            assert!(verdict.expected_distance < 0.01, "self distance too large");
            for (other, d) in verdict.distances {
                if other != e {
                    assert!(d > 0.03, "class {other:?} too close: {d}");
                }
            }
        }
    }

    #[test]
    fn poisson_spacings_match_no_surmise() {
        // Exponential quantiles: the spacing law of an uncorrelated
        // (integrable) spectrum.
        let n = 4000;
        let gaps: Vec<f64> = (0..n).map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            -(1.0 - u).ln()
        }).collect();
        let sample = SpacingSample::from_raw_gaps(gaps).unwrap();
        let verdict = spacing_test(&sample, Ensemble::Coe).unwrap();
        for (_, d) in verdict.distances {
            assert!(d > 0.1, "Poisson sample should stay far from every surmise, got {d}");
        }
    }

    #[test]
    fn spacing_sample_validates_unit_mean() {
        assert!(SpacingSample::new(vec![2.0, 2.0, 2.0]).is_err());
        let normalized = SpacingSample::from_raw_gaps(vec![2.0, 2.0, 2.0]).unwrap();
        assert_abs_diff_eq!(normalized.spacings[0], 1.0, epsilon = 1e-15);
        assert!(SpacingSample::new(vec![]).is_err());
        assert!(SpacingSample::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn spacing_test_requires_enough_data() {
        let sample = SpacingSample::from_raw_gaps(vec![1.0; 150]).unwrap();
        assert!(matches!(spacing_test(&sample, Ensemble::Coe), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn circle_spacings_have_unit_mean_and_full_count() {
        let u = models::floquet_coe(60, 1.7, 10.0).unwrap();
        let spec = SpectralDecomposition::of_unitary(&u).unwrap();
        let sample = quasi_energy_spacings(&spec, false).unwrap();
        assert_eq!(sample.len(), 61);
        let mean = sample.spacings.iter().sum::<f64>() / 61.0;
        assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kramers_merge_halves_the_symplectic_spectrum() {
        let u = models::floquet_cse(19, [2.5, 2.5, 5.0, 7.5]).unwrap();
        let spec = SpectralDecomposition::of_unitary(&u).unwrap();
        let sample = quasi_energy_spacings(&spec, true).unwrap();
        assert_eq!(sample.len(), 10);

        // A non-degenerate spectrum has no doublets to merge.
        let coe = models::floquet_coe(20, 1.7, 10.0).unwrap();
        let spec = SpectralDecomposition::of_unitary(&coe).unwrap();
        assert!(matches!(quasi_energy_spacings(&spec, true), Err(Error::Structure(_))));
    }

    #[test]
    fn unfolding_a_linear_spectrum_returns_unit_spacings() {
        let levels: Vec<f64> = (0..400).map(|i| 3.0 + 0.717 * i as f64).collect();
        let sample = unfold_spectrum(&levels, 10, 0.1).unwrap();
        for &s in &sample.spacings {
            assert_abs_diff_eq!(s, 1.0, epsilon = 2e-2);
        }
    }

    #[test]
    fn unfolding_flattens_a_quadratically_stretched_spectrum() {
        // E_n = n²: raw spacings grow linearly, unfolded ones must not.
        let levels: Vec<f64> = (1..=2000).map(|i| (i * i) as f64).collect();
        let sample = unfold_spectrum(&levels, 10, 0.1).unwrap();
        let n = sample.len() as f64;
        let mean = sample.spacings.iter().sum::<f64>() / n;
        assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-12);
        let var = sample.spacings.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
        assert!(var.sqrt() < 0.15, "unfolded spread {:.3} too large", var.sqrt());
    }

    #[test]
    fn unfolding_validates_inputs() {
        let few: Vec<f64> = (0..30).map(|i| i as f64).collect();
        assert!(unfold_spectrum(&few, 10, 0.1).is_err());
        let levels: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert!(unfold_spectrum(&levels, 0, 0.1).is_err());
        assert!(unfold_spectrum(&levels, 10, 0.6).is_err());
    }

    #[test]
    fn random_states_have_isotropic_second_moments() {
        let k = 40;
        for ensemble in Ensemble::ALL {
            let mut rng = ChaCha12Rng::seed_from_u64(7);
            let draws = 20000;
            let mut diag = vec![0.0_f64; k];
            let mut off = C64::new(0.0, 0.0);
            for _ in 0..draws {
                let a = random_amplitudes(k, ensemble, &mut rng);
                for i in 0..k {
                    diag[i] += a[i].norm_sqr();
                }
                off += a[0] * a[1].conj();
            }
            for d in &mut diag {
                *d /= draws as f64;
            }
            off /= C64::new(draws as f64, 0.0);
            // Var(|a_i|²) ~ 1/K², so the sample mean is good to ~1/(K √draws).
            let bound = 5.0 / (k as f64 * (draws as f64).sqrt());
            for (i, d) in diag.iter().enumerate() {
                assert!(
                    (d - 1.0 / k as f64).abs() < bound,
                    "{ensemble:?} component {i}: {d} vs {}",
                    1.0 / k as f64
                );
            }
            assert!(off.norm() < bound, "{ensemble:?} off-diagonal moment {off}");
        }
    }

    #[test]
    fn unitary_class_monte_carlo_hits_the_exact_haar_average() {
        let jz = collective_op(10, Axis::Z, Representation::Symmetric).unwrap();
        let estimate = random_qfi(&jz, Ensemble::Cue, 20000, 42).unwrap();
        let exact = random_qfi_exact(&jz);
        assert!(
            (estimate.mean - exact).abs() < 3.0 * estimate.std_error,
            "MC {} ± {} vs exact {exact}",
            estimate.mean,
            estimate.std_error
        );
    }

    #[test]
    fn real_class_monte_carlo_follows_the_real_sphere_average() {
        // For a real symmetric traceless generator and a random REAL ray,
        // E[F] = 4 Tr[O²]/K − 8 Tr[O²]/(K(K+2)); the complex-ray Haar
        // value is larger by O(1/K). The sampler must match the real-ray
        // value, clearly resolvable from the complex-ray one.
        let jz = collective_op(10, Axis::Z, Representation::Symmetric).unwrap();
        let k = jz.dim() as f64;
        let t2 = jz.trace_square();
        let real_sphere = 4.0 * t2 / k - 8.0 * t2 / (k * (k + 2.0));
        let estimate = random_qfi(&jz, Ensemble::Coe, 20000, 11).unwrap();
        assert!(
            (estimate.mean - real_sphere).abs() < 3.0 * estimate.std_error,
            "MC {} ± {} vs real-sphere {real_sphere}",
            estimate.mean,
            estimate.std_error
        );
        let haar_complex = random_qfi_exact(&jz);
        assert!(
            (estimate.mean - haar_complex).abs() > 5.0 * estimate.std_error,
            "real and complex averages should be resolvable at this sample size"
        );
    }

    #[test]
    fn monte_carlo_is_reproducible_from_the_seed() {
        let jz = collective_op(6, Axis::Z, Representation::Symmetric).unwrap();
        let a = random_qfi(&jz, Ensemble::Cue, 500, 3).unwrap();
        let b = random_qfi(&jz, Ensemble::Cue, 500, 3).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = random_qfi(&jz, Ensemble::Cue, 500, 4).unwrap();
        assert_ne!(a.mean.to_bits(), c.mean.to_bits());
    }

    #[test]
    fn monte_carlo_validates_inputs() {
        let jz = collective_op(6, Axis::Z, Representation::Symmetric).unwrap();
        assert!(random_qfi(&jz, Ensemble::Cue, 50, 1).is_err());
        assert!(sample_random_state(1, Ensemble::Coe, 0).is_err());
        let state = sample_random_state(11, Ensemble::Coe, 0).unwrap();
        assert_abs_diff_eq!(state.norm(), 1.0, epsilon = 1e-12);
        // Real-class rays have exactly real amplitudes.
        assert!(state.amplitudes.iter().all(|a| a.im == 0.0));
    }

    #[test]
    fn ensemble_labels_roundtrip() {
        for e in Ensemble::ALL {
            assert_eq!(e.label().parse::<Ensemble>().unwrap(), e);
        }
        assert!("gue".parse::<Ensemble>().is_err());
        assert_eq!(Ensemble::Coe.beta(), 1);
        assert_eq!(Ensemble::Cue.beta(), 2);
        assert_eq!(Ensemble::Cse.beta(), 4);
    }
}
