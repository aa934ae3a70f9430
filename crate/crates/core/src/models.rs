//! The model zoo: kicked tops in three symmetry classes, a chaotic spin
//! chain, and an integrable collective model as the control case.
//!
//! The kicked tops are one-kick Floquet unitaries on the symmetric
//! multiplet of `N` spins (`j = N/2`). Their antiunitary symmetries are
//! chosen so the level statistics fall into the three classical random
//! matrix classes:
//!
//! - **COE**: torsion about `z` after a linear `x` rotation,
//!   `U = exp(−i (C/N) J_z²) · exp(−i A J_x)`. Time reversal squares to
//!   `+1`, giving orthogonal statistics.
//! - **CUE**: a second torsion about `y` breaks the antiunitary
//!   symmetry, `U = exp(−i (λ'/N) J_y²) · exp(−i (λ/N) J_z²) ·
//!   exp(−i p J_x)`, giving unitary statistics.
//! - **CSE**: a kick built from `J_z⁴` and two anticommutator couplings
//!   preserves a time reversal squaring to `−1` on odd `N` (half-odd
//!   `j`), forcing Kramers doublets and symplectic statistics.
//!
//! The chain is a tilted-field Ising model with open boundaries,
//! chaotic away from the transverse and longitudinal integrable limits;
//! its only lattice symmetry is spatial reflection. The control model
//! is the collective `J_z`/`J_x²` Hamiltonian, integrable for every
//! coupling, whose instability sets an exponential but non-chaotic
//! growth scale.
//!
//! Couplings equal to exactly `0.0` drop their Floquet factor entirely
//! instead of multiplying by a numerical identity, so degenerate
//! parameter choices reduce one class to another bit for bit.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::spin::{
    collective_op_with_cap, Axis, BasisDescriptor, Operator, Representation, DEFAULT_FULL_QUBIT_CAP,
};

/// A fully parameterized model, serializable for run manifests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelSpec {
    KickedTopCoe { n: usize, a: f64, c: f64 },
    KickedTopCue { n: usize, p: f64, lambda: f64, lambda_prime: f64 },
    KickedTopCse { n: usize, lambda0: f64, lambda1: f64, lambda2: f64, lambda3: f64 },
    ChaoticIsing { n: usize, j: f64, h: f64, lambda: f64 },
    Lmg { n: usize, omega: f64, xi: f64 },
}

impl ModelSpec {
    /// Standard chaotic working point for the orthogonal-class top.
    pub fn coe(n: usize) -> Self {
        ModelSpec::KickedTopCoe { n, a: 1.7, c: 10.0 }
    }

    /// Standard chaotic working point for the unitary-class top.
    pub fn cue(n: usize) -> Self {
        ModelSpec::KickedTopCue { n, p: 1.7, lambda: 10.0, lambda_prime: 0.5 }
    }

    /// Standard chaotic working point for the symplectic-class top.
    pub fn cse(n: usize) -> Self {
        ModelSpec::KickedTopCse { n, lambda0: 2.5, lambda1: 2.5, lambda2: 5.0, lambda3: 7.5 }
    }

    /// Chaotic tilted-field chain.
    pub fn ising(n: usize) -> Self {
        ModelSpec::ChaoticIsing { n, j: 1.0, h: 1.0, lambda: 1.0 }
    }

    /// Integrable collective control model, in its unstable phase.
    pub fn lmg(n: usize) -> Self {
        ModelSpec::Lmg { n, omega: 1.0, xi: 1.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::KickedTopCoe { .. } => "kicked-top-coe",
            ModelSpec::KickedTopCue { .. } => "kicked-top-cue",
            ModelSpec::KickedTopCse { .. } => "kicked-top-cse",
            ModelSpec::ChaoticIsing { .. } => "chaotic-ising",
            ModelSpec::Lmg { .. } => "lmg",
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            ModelSpec::KickedTopCoe { n, .. }
            | ModelSpec::KickedTopCue { n, .. }
            | ModelSpec::KickedTopCse { n, .. }
            | ModelSpec::ChaoticIsing { n, .. }
            | ModelSpec::Lmg { n, .. } => n,
        }
    }

    /// Floquet models evolve stroboscopically; Hamiltonian models in
    /// continuous time.
    pub fn is_floquet(&self) -> bool {
        matches!(
            self,
            ModelSpec::KickedTopCoe { .. }
                | ModelSpec::KickedTopCue { .. }
                | ModelSpec::KickedTopCse { .. }
        )
    }

    pub fn representation(&self) -> Representation {
        match self {
            ModelSpec::ChaoticIsing { .. } => Representation::Full,
            _ => Representation::Symmetric,
        }
    }

    /// Builds the model's unitary (tops) or Hamiltonian (chain, control).
    pub fn build(&self) -> Result<Operator> {
        self.build_with_cap(DEFAULT_FULL_QUBIT_CAP)
    }

    /// Same as [`ModelSpec::build`] with an explicit full-representation cap.
    pub fn build_with_cap(&self, full_qubit_cap: usize) -> Result<Operator> {
        match *self {
            ModelSpec::KickedTopCoe { n, a, c } => floquet_coe(n, a, c),
            ModelSpec::KickedTopCue { n, p, lambda, lambda_prime } => {
                floquet_cue(n, p, lambda, lambda_prime)
            }
            ModelSpec::KickedTopCse { n, lambda0, lambda1, lambda2, lambda3 } => {
                floquet_cse(n, [lambda0, lambda1, lambda2, lambda3])
            }
            ModelSpec::ChaoticIsing { n, j, h, lambda } => {
                ising_hamiltonian_with_cap(n, j, h, lambda, full_qubit_cap)
            }
            ModelSpec::Lmg { n, omega, xi } => lmg_hamiltonian(n, omega, xi),
        }
    }
}

/// `exp(−i k Σ_i d_i |i⟩⟨i|)` for a real diagonal, evaluated entrywise.
fn diagonal_phase_factor(diag: &[f64], k: f64) -> CMat {
    let dim = diag.len();
    CMat::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::from_polar(1.0, -k * diag[i])
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Diagonal of `J_z` on the symmetric basis: `m = j − i`.
fn jz_diagonal(n: usize) -> Vec<f64> {
    let j = n as f64 / 2.0;
    (0..=n).map(|i| j - i as f64).collect()
}

fn product_of_factors(dim: usize, factors: Vec<CMat>) -> CMat {
    let mut acc: Option<CMat> = None;
    for f in factors {
        acc = Some(match acc {
            None => f,
            Some(a) => a * f,
        });
    }
    acc.unwrap_or_else(|| CMat::identity(dim, dim))
}

/// One-kick unitary of the orthogonal-class top:
/// `exp(−i (c/N) J_z²)` after `exp(−i a J_x)`.
pub fn floquet_coe(n: usize, a: f64, c: f64) -> Result<Operator> {
    if n == 0 {
        return Err(Error::invalid("kicked tops need at least one spin"));
    }
    let dim = n + 1;
    let mut factors = Vec::new();
    if c != 0.0 {
        let mz2: Vec<f64> = jz_diagonal(n).iter().map(|m| m * m).collect();
        factors.push(diagonal_phase_factor(&mz2, c / n as f64));
    }
    if a != 0.0 {
        let jx = collective_op_with_cap(n, Axis::X, Representation::Symmetric, 0)?;
        factors.push(linalg::exp_i_hermitian(&jx.matrix, -a)?);
    }
    Operator::unitary(product_of_factors(dim, factors), BasisDescriptor::symmetric(n))
}

/// One-kick unitary of the unitary-class top: a second torsion axis
/// breaks time reversal. With `lambda_prime == 0` the extra factor is
/// skipped and the operator is bit-for-bit the orthogonal-class one.
pub fn floquet_cue(n: usize, p: f64, lambda: f64, lambda_prime: f64) -> Result<Operator> {
    if n == 0 {
        return Err(Error::invalid("kicked tops need at least one spin"));
    }
    let dim = n + 1;
    let mut factors = Vec::new();
    if lambda_prime != 0.0 {
        let jy = collective_op_with_cap(n, Axis::Y, Representation::Symmetric, 0)?;
        let jy2 = &jy.matrix * &jy.matrix;
        factors.push(linalg::exp_i_hermitian(&jy2, -lambda_prime / n as f64)?);
    }
    if lambda != 0.0 {
        let mz2: Vec<f64> = jz_diagonal(n).iter().map(|m| m * m).collect();
        factors.push(diagonal_phase_factor(&mz2, lambda / n as f64));
    }
    if p != 0.0 {
        let jx = collective_op_with_cap(n, Axis::X, Representation::Symmetric, 0)?;
        factors.push(linalg::exp_i_hermitian(&jx.matrix, -p)?);
    }
    Operator::unitary(product_of_factors(dim, factors), BasisDescriptor::symmetric(n))
}

/// One-kick unitary of the symplectic-class top,
/// `U = exp(−i V) · exp(−i H₀)` with
/// `H₀ = 2 λ₀ J_z² / N` and
/// `V = 8 λ₁ J_z⁴ / N³ + 2 λ₂ {J_x, J_z} / N + 2 λ₃ {J_x, J_y} / N`.
///
/// The surviving time reversal squares to `−1` only for half-odd `j`,
/// so `N` must be odd; every quasi-energy is then doubly degenerate.
pub fn floquet_cse(n: usize, lambdas: [f64; 4]) -> Result<Operator> {
    if n == 0 {
        return Err(Error::invalid("kicked tops need at least one spin"));
    }
    if n % 2 == 0 {
        return Err(Error::invalid(format!(
            "the symplectic-class top needs an odd number of spins (half-odd j), got {n}"
        )));
    }
    let [l0, l1, l2, l3] = lambdas;
    let dim = n + 1;
    let nf = n as f64;
    let basis = BasisDescriptor::symmetric(n);

    let jx = collective_op_with_cap(n, Axis::X, Representation::Symmetric, 0)?;
    let jy = collective_op_with_cap(n, Axis::Y, Representation::Symmetric, 0)?;
    let mz = jz_diagonal(n);
    let jz = CMat::from_fn(dim, dim, |i, j| {
        if i == j { C64::new(mz[i], 0.0) } else { C64::new(0.0, 0.0) }
    });

    // Anticommutators assembled as P + P† stay Hermitian to the last bit.
    let xz = &jx.matrix * &jz;
    let xy = &jx.matrix * &jy.matrix;
    let mut v = CMat::zeros(dim, dim);
    v += (&xz + xz.adjoint()).scale(2.0 * l2 / nf);
    v += (&xy + xy.adjoint()).scale(2.0 * l3 / nf);
    for i in 0..dim {
        v[(i, i)] += C64::new(8.0 * l1 * mz[i].powi(4) / nf.powi(3), 0.0);
    }

    let mut factors = Vec::new();
    if linalg::max_abs(&v) > 0.0 {
        factors.push(linalg::exp_i_hermitian(&v, -1.0)?);
    }
    if l0 != 0.0 {
        let h0: Vec<f64> = mz.iter().map(|m| 2.0 * l0 * m * m / nf).collect();
        factors.push(diagonal_phase_factor(&h0, 1.0));
    }
    Operator::unitary(product_of_factors(dim, factors), basis)
}

/// Open-boundary tilted-field Ising chain
/// `H = Σ_{i<N−1} j σ_x^i σ_x^{i+1} + Σ_i (h σ_x^i + λ σ_z^i)`,
/// chaotic when the exchange and both field components compete.
pub fn ising_hamiltonian(n: usize, j: f64, h: f64, lambda: f64) -> Result<Operator> {
    ising_hamiltonian_with_cap(n, j, h, lambda, DEFAULT_FULL_QUBIT_CAP)
}

/// Same as [`ising_hamiltonian`] with an explicit qubit cap.
pub fn ising_hamiltonian_with_cap(
    n: usize,
    j: f64,
    h: f64,
    lambda: f64,
    full_qubit_cap: usize,
) -> Result<Operator> {
    if n < 2 {
        return Err(Error::invalid("the chain needs at least two sites"));
    }
    if n > full_qubit_cap {
        return Err(Error::capacity(format!(
            "full representation of {n} qubits exceeds the cap of {full_qubit_cap}; \
             raise the cap explicitly if 2^{n} amplitudes are intended"
        )));
    }
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    for b in 0..dim {
        let down = (b as u64).count_ones() as f64;
        m[(b, b)] = C64::new(lambda * (n as f64 - 2.0 * down), 0.0);
        for site in 0..n {
            let mask = 1usize << (n - 1 - site);
            m[(b ^ mask, b)] += C64::new(h, 0.0);
            if site + 1 < n {
                let pair = mask | (mask >> 1);
                m[(b ^ pair, b)] += C64::new(j, 0.0);
            }
        }
    }
    Operator::hermitian(m, BasisDescriptor::full(n))
}

/// Collective `H = Ω J_z − (2ξ/N) J_x²` on the symmetric basis. For
/// `Ω (Ω − 2ξ) < 0` the classical `−z` pole turns unstable with rate
/// `sqrt(Ω (2ξ − Ω))`, which is the exponential scale the quantum model
/// inherits, chaos-free.
pub fn lmg_hamiltonian(n: usize, omega: f64, xi: f64) -> Result<Operator> {
    if n == 0 {
        return Err(Error::invalid("the collective model needs at least one spin"));
    }
    let jx = collective_op_with_cap(n, Axis::X, Representation::Symmetric, 0)?;
    let mut m = (&jx.matrix * &jx.matrix).scale(-2.0 * xi / n as f64);
    for (i, mz) in jz_diagonal(n).iter().enumerate() {
        m[(i, i)] += C64::new(omega * mz, 0.0);
    }
    Operator::hermitian(m, BasisDescriptor::symmetric(n))
}

/// Classical instability rate of the collective control model at the
/// `−z` pole: `sqrt(Ω (2ξ − Ω))` inside the unstable phase, zero outside.
pub fn lmg_instability_rate(omega: f64, xi: f64) -> f64 {
    let disc = omega * (2.0 * xi - omega);
    if disc > 0.0 {
        disc.sqrt()
    } else {
        0.0
    }
}
