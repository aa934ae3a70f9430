//! Collective spin algebra on the two bases the rest of the crate runs on.
//!
//! A system of `N` spin-1/2 particles carries the collective operators
//! `J_a = (1/2) Σ_i σ_a^(i)`. Two representations matter here:
//!
//! - **Symmetric**: the `N + 1` dimensional spin-`j` multiplet with
//!   `j = N/2`, spanned by Dicke states `|j, m⟩`. Basis index `i`
//!   corresponds to `m = j − i`, so index 0 is the fully polarized
//!   `m = +j` state. Collective models (kicked tops, twisting
//!   Hamiltonians) never leave this multiplet.
//! - **Full**: the whole `2^N` computational basis, needed for spin
//!   chains without permutation symmetry. Basis index `b` encodes the
//!   configuration bitwise with site 0 in the most significant bit;
//!   bit value 0 is spin up (`σ_z = +1`), bit value 1 is spin down.
//!
//! The full representation grows exponentially, so its builders take a
//! qubit cap and fail with a capacity error *before* allocating.
//!
//! Besides the operators themselves the module provides coherent spin
//! states (the standard initial states for chaos diagnostics) and
//! projections onto symmetry sectors of the full basis. Sector
//! projections are stored structurally: every sector basis vector is a
//! combination of at most two computational states, so projecting a
//! dense operator costs `O(K'^2)` with a constant of four, not a dense
//! triple product.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::tol;

/// Largest qubit count the full representation accepts by default.
/// `2^14` complex doubles per matrix column is about 256 KiB; a dense
/// operator at this size is 4 GiB of flops away from anything useful,
/// so larger requests are almost always a mistake rather than intent.
pub const DEFAULT_FULL_QUBIT_CAP: usize = 14;

/// Which basis a matrix or state lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    /// Maximal-spin multiplet, dimension `N + 1`.
    Symmetric,
    /// Computational basis, dimension `2^N`.
    Full,
    /// A symmetry-adapted subspace of the full basis.
    Sector,
}

/// Identifies a basis completely enough to refuse mixed-basis algebra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisDescriptor {
    pub representation: Representation,
    pub qubit_count: usize,
    pub dimension: usize,
    /// Set only for sector bases, e.g. `"bit-reversal-even"`.
    pub sector_label: Option<String>,
}

impl BasisDescriptor {
    pub fn symmetric(qubit_count: usize) -> Self {
        Self {
            representation: Representation::Symmetric,
            qubit_count,
            dimension: qubit_count + 1,
            sector_label: None,
        }
    }

    pub fn full(qubit_count: usize) -> Self {
        assert!(qubit_count < 63, "full basis index must fit in u64 arithmetic");
        Self {
            representation: Representation::Full,
            qubit_count,
            dimension: 1usize << qubit_count,
            sector_label: None,
        }
    }

    pub fn sector(qubit_count: usize, dimension: usize, label: impl Into<String>) -> Self {
        Self {
            representation: Representation::Sector,
            qubit_count,
            dimension,
            sector_label: Some(label.into()),
        }
    }

    /// Bases must match exactly before two objects may be combined.
    pub fn compatible(&self, other: &Self) -> bool {
        self == other
    }
}

fn ensure_same_basis(a: &BasisDescriptor, b: &BasisDescriptor, what: &str) -> Result<()> {
    if a.compatible(b) {
        Ok(())
    } else {
        Err(Error::basis(format!(
            "{what}: basis mismatch ({:?} dim {} vs {:?} dim {})",
            a.representation, a.dimension, b.representation, b.dimension
        )))
    }
}

fn ensure_full_capacity(qubit_count: usize, cap: usize) -> Result<()> {
    if qubit_count > cap {
        return Err(Error::capacity(format!(
            "full representation of {qubit_count} qubits exceeds the cap of {cap}; \
             raise the cap explicitly if 2^{qubit_count} amplitudes are intended"
        )));
    }
    Ok(())
}

/// Whether a matrix is validated as Hermitian or unitary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    Hermitian,
    Unitary,
}

/// A dense matrix tagged with its basis and validated at construction.
#[derive(Clone, Debug)]
pub struct Operator {
    pub matrix: CMat,
    pub basis: BasisDescriptor,
    pub kind: OperatorKind,
}

impl Operator {
    /// Wraps a Hermitian matrix, rejecting hermiticity defects above
    /// [`tol::HERMITIAN_TOL`].
    pub fn hermitian(matrix: CMat, basis: BasisDescriptor) -> Result<Self> {
        Self::check_shape(&matrix, &basis)?;
        let defect = linalg::hermiticity_error(&matrix);
        if defect > tol::HERMITIAN_TOL {
            return Err(Error::structure(format!(
                "matrix is not Hermitian: defect {defect:.3e} exceeds {:.0e}",
                tol::HERMITIAN_TOL
            )));
        }
        Ok(Self { matrix, basis, kind: OperatorKind::Hermitian })
    }

    /// Wraps a unitary matrix, rejecting unitarity defects above
    /// [`tol::UNITARY_TOL`].
    pub fn unitary(matrix: CMat, basis: BasisDescriptor) -> Result<Self> {
        Self::check_shape(&matrix, &basis)?;
        let defect = linalg::unitarity_error(&matrix);
        if defect > tol::UNITARY_TOL {
            return Err(Error::structure(format!(
                "matrix is not unitary: defect {defect:.3e} exceeds {:.0e}",
                tol::UNITARY_TOL
            )));
        }
        Ok(Self { matrix, basis, kind: OperatorKind::Unitary })
    }

    fn check_shape(matrix: &CMat, basis: &BasisDescriptor) -> Result<()> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::invalid("operator matrix must be square"));
        }
        if matrix.nrows() != basis.dimension {
            return Err(Error::basis(format!(
                "matrix dimension {} does not match basis dimension {}",
                matrix.nrows(),
                basis.dimension
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.basis.dimension
    }

    pub fn trace(&self) -> C64 {
        let mut t = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            t += self.matrix[(i, i)];
        }
        t
    }

    /// `Tr[M]` as a real number. Valid for Hermitian operators, whose
    /// diagonal is real up to the construction tolerance.
    pub fn trace_real(&self) -> f64 {
        self.trace().re
    }

    /// `Tr[M²]` for Hermitian `M`, computed as the squared Frobenius norm
    /// so no matrix product is needed.
    pub fn trace_square(&self) -> f64 {
        assert!(
            self.kind == OperatorKind::Hermitian,
            "trace_square is only meaningful for Hermitian operators"
        );
        linalg::frobenius_sq(&self.matrix)
    }

    /// `⟨ψ|M|ψ⟩` for Hermitian `M` (the value is real by construction).
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        ensure_same_basis(&self.basis, &state.basis, "expectation")?;
        let mv = &self.matrix * &state.amplitudes;
        Ok(state.amplitudes.dotc(&mv).re)
    }

    /// Matrix-vector application, staying in the same basis.
    pub fn apply(&self, state: &StateVector) -> Result<CVec> {
        ensure_same_basis(&self.basis, &state.basis, "apply")?;
        Ok(&self.matrix * &state.amplitudes)
    }
}

/// A normalized pure state tagged with its basis.
#[derive(Clone, Debug)]
pub struct StateVector {
    pub amplitudes: CVec,
    pub basis: BasisDescriptor,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized to
    /// [`tol::STATE_NORM_TOL`].
    pub fn new(amplitudes: CVec, basis: BasisDescriptor) -> Result<Self> {
        if amplitudes.len() != basis.dimension {
            return Err(Error::basis(format!(
                "state dimension {} does not match basis dimension {}",
                amplitudes.len(),
                basis.dimension
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tol::STATE_NORM_TOL {
            return Err(Error::structure(format!(
                "state is not normalized: |norm - 1| = {:.3e}",
                (norm - 1.0).abs()
            )));
        }
        Ok(Self { amplitudes, basis })
    }

    /// Normalizes amplitudes whose norm is within `drift_tol` of one.
    /// Used after unitary evolution, where roundoff drifts the norm by
    /// more than the strict construction tolerance but anything beyond
    /// `drift_tol` still signals a broken decomposition.
    pub fn renormalized(mut amplitudes: CVec, basis: BasisDescriptor, drift_tol: f64) -> Result<Self> {
        if amplitudes.len() != basis.dimension {
            return Err(Error::basis(format!(
                "state dimension {} does not match basis dimension {}",
                amplitudes.len(),
                basis.dimension
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > drift_tol {
            return Err(Error::numerical(format!(
                "state norm drifted to {norm:.12}, beyond tolerance {drift_tol:.0e}"
            )));
        }
        amplitudes /= C64::new(norm, 0.0);
        Ok(Self { amplitudes, basis })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized_from(mut amplitudes: CVec, basis: BasisDescriptor) -> Result<Self> {
        if amplitudes.len() != basis.dimension {
            return Err(Error::basis(format!(
                "state dimension {} does not match basis dimension {}",
                amplitudes.len(),
                basis.dimension
            )));
        }
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        amplitudes /= C64::new(norm, 0.0);
        Ok(Self { amplitudes, basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.dimension
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        ensure_same_basis(&self.basis, &other.basis, "inner product")?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

/// Cartesian component of the collective spin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn label(&self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    pub fn unit(&self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
        }
    }
}

/// The three collective components over one shared basis.
#[derive(Clone, Debug)]
pub struct CollectiveOps {
    pub jx: Operator,
    pub jy: Operator,
    pub jz: Operator,
}

impl CollectiveOps {
    pub fn axis(&self, axis: Axis) -> &Operator {
        match axis {
            Axis::X => &self.jx,
            Axis::Y => &self.jy,
            Axis::Z => &self.jz,
        }
    }

    /// `n̂ · J` for a unit direction `n̂`.
    pub fn along(&self, direction: [f64; 3]) -> Result<Operator> {
        let [nx, ny, nz] = direction;
        let norm = (nx * nx + ny * ny + nz * nz).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("direction must be a unit vector"));
        }
        let m = self.jx.matrix.scale(nx) + self.jy.matrix.scale(ny) + self.jz.matrix.scale(nz);
        Operator::hermitian(m, self.jx.basis.clone())
    }
}

/// Raising coefficient `⟨j, m+1| J₊ |j, m⟩ = sqrt(j(j+1) − m(m+1))`.
fn ladder_up(j: f64, m: f64) -> f64 {
    (j * (j + 1.0) - m * (m + 1.0)).sqrt()
}

fn collective_symmetric(n: usize, axis: Axis) -> CMat {
    let dim = n + 1;
    let j = n as f64 / 2.0;
    let mut m = CMat::zeros(dim, dim);
    match axis {
        Axis::Z => {
            for i in 0..dim {
                m[(i, i)] = C64::new(j - i as f64, 0.0);
            }
        }
        Axis::X | Axis::Y => {
            // Index i holds m_i = j − i, so J₊ connects column i to row i−1.
            for i in 1..dim {
                let c = ladder_up(j, j - i as f64);
                match axis {
                    Axis::X => {
                        m[(i - 1, i)] = C64::new(0.5 * c, 0.0);
                        m[(i, i - 1)] = C64::new(0.5 * c, 0.0);
                    }
                    Axis::Y => {
                        m[(i - 1, i)] = C64::new(0.0, -0.5 * c);
                        m[(i, i - 1)] = C64::new(0.0, 0.5 * c);
                    }
                    Axis::Z => unreachable!(),
                }
            }
        }
    }
    m
}

fn collective_full(n: usize, axis: Axis) -> CMat {
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    match axis {
        Axis::Z => {
            for b in 0..dim {
                let down = (b as u64).count_ones() as f64;
                m[(b, b)] = C64::new(0.5 * (n as f64 - 2.0 * down), 0.0);
            }
        }
        Axis::X => {
            for b in 0..dim {
                for site in 0..n {
                    let mask = 1usize << (n - 1 - site);
                    m[(b ^ mask, b)] += C64::new(0.5, 0.0);
                }
            }
        }
        Axis::Y => {
            for b in 0..dim {
                for site in 0..n {
                    let mask = 1usize << (n - 1 - site);
                    // σ_y flips the bit; the sign depends on the source spin:
                    // ⟨↑|σ_y|↓⟩ = −i (bit 1 → 0), ⟨↓|σ_y|↑⟩ = +i (bit 0 → 1).
                    let amp = if b & mask != 0 { C64::new(0.0, -0.5) } else { C64::new(0.0, 0.5) };
                    m[(b ^ mask, b)] += amp;
                }
            }
        }
    }
    m
}

/// One collective spin component in the requested representation.
pub fn collective_op(n: usize, axis: Axis, rep: Representation) -> Result<Operator> {
    collective_op_with_cap(n, axis, rep, DEFAULT_FULL_QUBIT_CAP)
}

/// Same as [`collective_op`] with an explicit full-representation cap.
pub fn collective_op_with_cap(
    n: usize,
    axis: Axis,
    rep: Representation,
    full_qubit_cap: usize,
) -> Result<Operator> {
    if n == 0 {
        return Err(Error::invalid("collective operators need at least one spin"));
    }
    match rep {
        Representation::Symmetric => {
            Operator::hermitian(collective_symmetric(n, axis), BasisDescriptor::symmetric(n))
        }
        Representation::Full => {
            ensure_full_capacity(n, full_qubit_cap)?;
            Operator::hermitian(collective_full(n, axis), BasisDescriptor::full(n))
        }
        Representation::Sector => Err(Error::invalid(
            "sector bases are produced by symmetry projection, not built directly",
        )),
    }
}

/// All three collective components at once.
pub fn build_collective_ops(n: usize, rep: Representation) -> Result<CollectiveOps> {
    Ok(CollectiveOps {
        jx: collective_op(n, Axis::X, rep)?,
        jy: collective_op(n, Axis::Y, rep)?,
        jz: collective_op(n, Axis::Z, rep)?,
    })
}

/// Coherent spin state pointing along `(theta, phi)`.
///
/// Every spin is prepared in the same single-qubit state
/// `cos(θ/2)|↑⟩ + e^{iφ} sin(θ/2)|↓⟩`, so the collective Bloch vector
/// has length `N/2` and direction `(sin θ cos φ, sin θ sin φ, cos θ)`.
/// In the symmetric basis the amplitude on `|j, m⟩` with `k = j − m`
/// flipped spins is `sqrt(C(N,k)) cos^{N−k}(θ/2) sin^k(θ/2) e^{ikφ}`;
/// the binomial weights are accumulated in log space so the state stays
/// finite for thousands of spins.
pub fn coherent_spin_state(n: usize, theta: f64, phi: f64, rep: Representation) -> Result<StateVector> {
    coherent_spin_state_with_cap(n, theta, phi, rep, DEFAULT_FULL_QUBIT_CAP)
}

/// Same as [`coherent_spin_state`] with an explicit full-representation cap.
pub fn coherent_spin_state_with_cap(
    n: usize,
    theta: f64,
    phi: f64,
    rep: Representation,
    full_qubit_cap: usize,
) -> Result<StateVector> {
    if n == 0 {
        return Err(Error::invalid("coherent states need at least one spin"));
    }
    if !(theta.is_finite() && phi.is_finite()) {
        return Err(Error::invalid("coherent state angles must be finite"));
    }
    let half = 0.5 * theta;
    let (c, s) = (half.cos(), half.sin());
    match rep {
        Representation::Symmetric => {
            let dim = n + 1;
            let mut amps = CVec::zeros(dim);
            if s == 0.0 {
                amps[0] = C64::new(1.0, 0.0);
            } else if c == 0.0 {
                amps[n] = C64::from_polar(1.0, phi * n as f64);
            } else {
                // ln C(n, k) built up by the ratio recurrence; both c and s
                // are strictly positive here so logs are safe.
                let (ln_c, ln_s) = (c.abs().ln(), s.abs().ln());
                let sign_c = c.signum();
                let mut ln_binom = 0.0_f64;
                for k in 0..dim {
                    let ln_mag = 0.5 * ln_binom + (n - k) as f64 * ln_c + k as f64 * ln_s;
                    // cos(θ/2) < 0 only for θ outside [−π, π]; carry its sign.
                    let sign = if (n - k) % 2 == 1 && sign_c < 0.0 { -1.0 } else { 1.0 };
                    amps[k] = C64::from_polar(sign * ln_mag.exp(), phi * k as f64);
                    if k < n {
                        ln_binom += ((n - k) as f64 / (k + 1) as f64).ln();
                    }
                }
            }
            StateVector::normalized_from(amps, BasisDescriptor::symmetric(n))
        }
        Representation::Full => {
            ensure_full_capacity(n, full_qubit_cap)?;
            let dim = 1usize << n;
            let down = C64::from_polar(s, phi);
            let mut amps = CVec::zeros(dim);
            for b in 0..dim {
                let k = (b as u64).count_ones();
                let mut a = C64::new(c.powi((n as u32 - k) as i32), 0.0);
                a *= down.powu(k);
                amps[b] = a;
            }
            StateVector::normalized_from(amps, BasisDescriptor::full(n))
        }
        Representation::Sector => Err(Error::invalid(
            "coherent states in a sector basis must be projected explicitly",
        )),
    }
}

/// Symmetries of the full basis that this crate can block-diagonalize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryKind {
    /// Spatial reflection of the chain: site `i ↔ N−1−i`, i.e. reversal
    /// of the index word's bits.
    BitReversal,
    /// Spin-flip parity `Π σ_z^(i)`, diagonal with sign `(−1)^{#down}`.
    Parity,
}

impl SymmetryKind {
    pub fn label(&self) -> &'static str {
        match self {
            SymmetryKind::BitReversal => "bit-reversal",
            SymmetryKind::Parity => "parity",
        }
    }
}

/// Eigenvalue of the symmetry on a sector: `+1` (even) or `−1` (odd).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectorParity {
    Even,
    Odd,
}

impl SectorParity {
    pub fn label(&self) -> &'static str {
        match self {
            SectorParity::Even => "even",
            SectorParity::Odd => "odd",
        }
    }

    fn sign(&self) -> f64 {
        match self {
            SectorParity::Even => 1.0,
            SectorParity::Odd => -1.0,
        }
    }
}

fn reverse_bits(b: usize, n: usize) -> usize {
    let mut out = 0usize;
    for i in 0..n {
        if b & (1 << i) != 0 {
            out |= 1 << (n - 1 - i);
        }
    }
    out
}

fn parity_sign(b: usize) -> f64 {
    if (b as u64).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A symmetry-adapted basis of the full representation.
///
/// Each sector basis vector touches at most two computational states:
/// either a fixed point of the symmetry (weight 1) or a two-state orbit
/// `(|b⟩ ± |b'⟩)/√2`. The members are sorted by their representative
/// index, so the sector basis is deterministic.
#[derive(Clone, Debug)]
pub struct SectorProjection {
    pub kind: SymmetryKind,
    pub parity: SectorParity,
    pub basis: BasisDescriptor,
    full_basis: BasisDescriptor,
    /// `(representative, partner)`; `partner` is `None` on fixed points.
    members: Vec<(usize, Option<usize>)>,
}

impl SectorProjection {
    /// Builds the sector basis. Fails unless the operator commutes with
    /// the symmetry to within [`tol::SECTOR_COMMUTE_TOL`], checked
    /// entrywise against the exact permutation or sign action.
    pub fn build(op: &Operator, kind: SymmetryKind, parity: SectorParity) -> Result<Self> {
        if op.basis.representation != Representation::Full {
            return Err(Error::invalid("symmetry sectors are defined on the full representation"));
        }
        let n = op.basis.qubit_count;
        let dim = op.basis.dimension;
        let m = &op.matrix;

        let worst = match kind {
            SymmetryKind::BitReversal => {
                let perm: Vec<usize> = (0..dim).map(|b| reverse_bits(b, n)).collect();
                let mut worst = 0.0_f64;
                for i in 0..dim {
                    for j in 0..dim {
                        let d = (m[(perm[i], perm[j])] - m[(i, j)]).norm();
                        if d > worst {
                            worst = d;
                        }
                    }
                }
                worst
            }
            SymmetryKind::Parity => {
                let mut worst = 0.0_f64;
                for i in 0..dim {
                    for j in 0..dim {
                        if parity_sign(i) != parity_sign(j) {
                            let d = m[(i, j)].norm();
                            if d > worst {
                                worst = d;
                            }
                        }
                    }
                }
                worst
            }
        };
        if worst > tol::SECTOR_COMMUTE_TOL {
            return Err(Error::symmetry(format!(
                "operator does not commute with {}: violation {worst:.3e} exceeds {:.0e}",
                kind.label(),
                tol::SECTOR_COMMUTE_TOL
            )));
        }

        let mut members: Vec<(usize, Option<usize>)> = Vec::new();
        match kind {
            SymmetryKind::BitReversal => {
                for b in 0..dim {
                    let r = reverse_bits(b, n);
                    if b == r {
                        if parity == SectorParity::Even {
                            members.push((b, None));
                        }
                    } else if b < r {
                        members.push((b, Some(r)));
                    }
                }
            }
            SymmetryKind::Parity => {
                for b in 0..dim {
                    if parity_sign(b) == parity.sign() {
                        members.push((b, None));
                    }
                }
            }
        }

        let label = format!("{}-{}", kind.label(), parity.label());
        let basis = BasisDescriptor::sector(n, members.len(), label);
        Ok(Self { kind, parity, basis, full_basis: op.basis.clone(), members })
    }

    pub fn dim(&self) -> usize {
        self.members.len()
    }

    /// The coefficients of sector basis vector `alpha` on the full basis,
    /// as up to two `(index, coefficient)` pairs.
    fn vector_entries(&self, alpha: usize) -> [(usize, f64); 2] {
        let (rep, partner) = self.members[alpha];
        match partner {
            None => [(rep, 1.0), (rep, 0.0)],
            Some(p) => {
                let w = std::f64::consts::FRAC_1_SQRT_2;
                [(rep, w), (p, self.parity.sign() * w)]
            }
        }
    }

    /// Projects an operator into the sector. The operator must itself
    /// commute with the symmetry; this is re-verified because projecting
    /// a non-commuting observable silently discards matrix elements.
    pub fn project_operator(&self, op: &Operator) -> Result<Operator> {
        ensure_same_basis(&op.basis, &self.full_basis, "sector projection")?;
        // Re-run the commutation check by building a throwaway projection.
        let _ = Self::build(op, self.kind, self.parity)?;

        let k = self.dim();
        let mut out = CMat::zeros(k, k);
        for alpha in 0..k {
            let va = self.vector_entries(alpha);
            for beta in 0..k {
                let vb = self.vector_entries(beta);
                let mut acc = C64::new(0.0, 0.0);
                for &(i, ci) in va.iter() {
                    if ci == 0.0 {
                        continue;
                    }
                    for &(j, cj) in vb.iter() {
                        if cj == 0.0 {
                            continue;
                        }
                        acc += op.matrix[(i, j)] * (ci * cj);
                    }
                }
                out[(alpha, beta)] = acc;
            }
        }
        match op.kind {
            OperatorKind::Hermitian => Operator::hermitian(out, self.basis.clone()),
            OperatorKind::Unitary => Operator::unitary(out, self.basis.clone()),
        }
    }

    /// Projects a state into the sector. Fails if more than
    /// [`tol::SECTOR_WEIGHT_TOL`] of its weight lives outside.
    pub fn project_state(&self, state: &StateVector) -> Result<StateVector> {
        ensure_same_basis(&state.basis, &self.full_basis, "sector projection")?;
        let k = self.dim();
        let mut amps = CVec::zeros(k);
        let mut weight = 0.0_f64;
        for alpha in 0..k {
            let mut acc = C64::new(0.0, 0.0);
            for &(i, ci) in self.vector_entries(alpha).iter() {
                if ci != 0.0 {
                    acc += state.amplitudes[i] * ci;
                }
            }
            weight += acc.norm_sqr();
            amps[alpha] = acc;
        }
        if 1.0 - weight > tol::SECTOR_WEIGHT_TOL {
            return Err(Error::symmetry(format!(
                "state keeps only {weight:.12} of its weight in the {} {} sector",
                self.kind.label(),
                self.parity.label()
            )));
        }
        StateVector::normalized_from(amps, self.basis.clone())
    }

    /// Lifts a sector state back to the full basis.
    pub fn embed_state(&self, state: &StateVector) -> Result<StateVector> {
        ensure_same_basis(&state.basis, &self.basis, "sector embedding")?;
        let mut amps = CVec::zeros(self.full_basis.dimension);
        for alpha in 0..self.dim() {
            for &(i, ci) in self.vector_entries(alpha).iter() {
                if ci != 0.0 {
                    amps[i] += state.amplitudes[alpha] * ci;
                }
            }
        }
        StateVector::new(amps, self.full_basis.clone())
    }
}

/// Projects `op` onto one symmetry sector, returning the block together
/// with the projection that produced it.
pub fn symmetry_sector(
    op: &Operator,
    kind: SymmetryKind,
    parity: SectorParity,
) -> Result<(Operator, SectorProjection)> {
    let projection = SectorProjection::build(op, kind, parity)?;
    let block = projection.project_operator(op)?;
    Ok((block, projection))
}

/// Splits a Dicke-space operator into its two spin-flip sectors.
///
/// The flip is the π rotation about the kick axis, `m ↔ −m` on the
/// Dicke ladder, i.e. index reversal `i ↔ dim−1−i`. Any operator built
/// from even powers of the flipped generators plus the kick generator
/// itself commutes with it, so its spectrum superposes two independent
/// sequences; spectral statistics are meaningful only per sector. The
/// even sector takes the symmetrized combinations `(|m⟩ + |−m⟩)/√2`
/// (and the `m = 0` state when the dimension is odd), the odd sector
/// the antisymmetrized ones.
///
/// Returns `(even, odd)` blocks of the same kind as `op`. Fails with a
/// symmetry mismatch when `op` does not commute with the flip.
pub fn spin_flip_blocks(op: &Operator) -> Result<(Operator, Operator)> {
    if op.basis.representation != Representation::Symmetric {
        return Err(Error::invalid("the spin flip is defined on the Dicke ladder"));
    }
    let dim = op.basis.dimension;
    let m = &op.matrix;
    let mut worst = 0.0_f64;
    for i in 0..dim {
        for j in 0..dim {
            let d = (m[(dim - 1 - i, dim - 1 - j)] - m[(i, j)]).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    if worst > tol::SECTOR_COMMUTE_TOL {
        return Err(Error::symmetry(format!(
            "operator does not commute with the spin flip: violation {worst:.3e} exceeds {:.0e}",
            tol::SECTOR_COMMUTE_TOL
        )));
    }

    let half = dim / 2;
    let root = std::f64::consts::FRAC_1_SQRT_2;
    let block = |sign: f64, label: &str| -> Result<Operator> {
        let pairs = half;
        let fixed = if sign > 0.0 { dim % 2 } else { 0 };
        let k = pairs + fixed;
        let mut p = CMat::zeros(dim, k);
        for a in 0..pairs {
            p[(a, a)] = C64::new(root, 0.0);
            p[(dim - 1 - a, a)] = C64::new(sign * root, 0.0);
        }
        if fixed == 1 {
            p[(half, pairs)] = C64::new(1.0, 0.0);
        }
        let sub = p.adjoint() * m * p;
        let basis =
            BasisDescriptor::sector(op.basis.qubit_count, k, format!("spin-flip-{label}"));
        match op.kind {
            OperatorKind::Hermitian => Operator::hermitian(sub, basis),
            OperatorKind::Unitary => Operator::unitary(sub, basis),
        }
    };
    Ok((block(1.0, "even")?, block(-1.0, "odd")?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn commutator(a: &CMat, b: &CMat) -> CMat {
        a * b - b * a
    }

    #[test]
    fn symmetric_two_qubit_matrices_match_tables() {
        let ops = build_collective_ops(2, Representation::Symmetric).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..3 {
            assert_abs_diff_eq!(ops.jz.matrix[(i, i)].re, 1.0 - i as f64, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(ops.jx.matrix[(0, 1)].re, r, epsilon = 1e-15);
        assert_abs_diff_eq!(ops.jx.matrix[(1, 2)].re, r, epsilon = 1e-15);
        assert_abs_diff_eq!(ops.jx.matrix[(0, 2)].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ops.jy.matrix[(0, 1)].im, -r, epsilon = 1e-15);
        assert_abs_diff_eq!(ops.jy.matrix[(1, 0)].im, r, epsilon = 1e-15);
    }

    #[test]
    fn full_two_qubit_jz_counts_flipped_spins() {
        let jz = collective_op(2, Axis::Z, Representation::Full).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| jz.matrix[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn single_qubit_reps_agree_with_pauli_over_two() {
        for axis in Axis::ALL {
            let sym = collective_op(1, axis, Representation::Symmetric).unwrap();
            let full = collective_op(1, axis, Representation::Full).unwrap();
            let diff = &sym.matrix - &full.matrix;
            assert!(linalg::max_abs(&diff) < 1e-15, "axis {:?}", axis);
        }
        let jy = collective_op(1, Axis::Y, Representation::Symmetric).unwrap();
        assert_abs_diff_eq!(jy.matrix[(0, 1)].im, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn su2_commutators_hold_in_both_representations() {
        for rep in [Representation::Symmetric, Representation::Full] {
            let ops = build_collective_ops(3, rep).unwrap();
            let pairs = [
                (&ops.jx.matrix, &ops.jy.matrix, &ops.jz.matrix),
                (&ops.jy.matrix, &ops.jz.matrix, &ops.jx.matrix),
                (&ops.jz.matrix, &ops.jx.matrix, &ops.jy.matrix),
            ];
            for (a, b, c) in pairs {
                let lhs = commutator(a, b);
                let rhs = c.map(|z| z * C64::new(0.0, 1.0));
                assert!(linalg::max_abs(&(lhs - rhs)) < 1e-13, "rep {:?}", rep);
            }
        }
    }

    #[test]
    fn casimir_is_maximal_on_symmetric_rep() {
        let n = 5;
        let ops = build_collective_ops(n, Representation::Symmetric).unwrap();
        let j = n as f64 / 2.0;
        let casimir = &ops.jx.matrix * &ops.jx.matrix
            + &ops.jy.matrix * &ops.jy.matrix
            + &ops.jz.matrix * &ops.jz.matrix;
        for i in 0..=n {
            for k in 0..=n {
                let expected = if i == k { j * (j + 1.0) } else { 0.0 };
                assert_abs_diff_eq!(casimir[(i, k)].re, expected, epsilon = 1e-12);
                assert_abs_diff_eq!(casimir[(i, k)].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn coherent_state_matches_binomial_formula() {
        let (n, theta, phi) = (10usize, 2.0, 0.7);
        let state = coherent_spin_state(n, theta, phi, Representation::Symmetric).unwrap();
        let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
        let mut binom = 1.0_f64;
        for k in 0..=n {
            let mag = binom.sqrt() * c.powi((n - k) as i32) * s.powi(k as i32);
            let expected = C64::from_polar(mag, phi * k as f64);
            assert!((state.amplitudes[k] - expected).norm() < 1e-13, "k = {k}");
            binom *= (n - k) as f64 / (k + 1) as f64;
        }
    }

    #[test]
    fn coherent_state_is_eigenstate_of_projected_spin() {
        let (theta, phi) = (1.234_f64, -2.1_f64);
        let dir = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        for rep in [Representation::Symmetric, Representation::Full] {
            let n = 7;
            let ops = build_collective_ops(n, rep).unwrap();
            let proj = ops.along(dir).unwrap();
            let state = coherent_spin_state(n, theta, phi, rep).unwrap();
            let applied = proj.apply(&state).unwrap();
            let j = n as f64 / 2.0;
            let residual = (&applied - state.amplitudes.map(|z| z * C64::new(j, 0.0))).norm();
            assert!(residual < 1e-10, "rep {:?}: residual {residual}", rep);
        }
    }

    #[test]
    fn coherent_state_poles_are_basis_states() {
        let up = coherent_spin_state(6, 0.0, 0.4, Representation::Symmetric).unwrap();
        assert_abs_diff_eq!(up.amplitudes[0].re, 1.0, epsilon = 1e-15);
        let down = coherent_spin_state(6, std::f64::consts::PI, 0.0, Representation::Symmetric).unwrap();
        assert_abs_diff_eq!(down.amplitudes[6].norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn coherent_state_survives_thousands_of_spins() {
        let n = 4000;
        let state = coherent_spin_state(n, 1.9, 0.3, Representation::Symmetric).unwrap();
        assert_abs_diff_eq!(state.norm(), 1.0, epsilon = 1e-12);
        // The weight distribution peaks near k = n sin²(θ/2).
        let peak = (0..=n)
            .max_by(|&a, &b| state.amplitudes[a].norm().total_cmp(&state.amplitudes[b].norm()))
            .unwrap();
        let expected = n as f64 * (0.5 * 1.9f64).sin().powi(2);
        assert!((peak as f64 - expected).abs() < 3.0, "peak {peak} vs {expected}");
    }

    #[test]
    fn bit_reversal_sector_dimensions_split_palindromes() {
        // N = 4: 4 palindromic words, (16 − 4)/2 = 6 mixed orbits.
        let ops = build_collective_ops(4, Representation::Full).unwrap();
        let (even, _) = symmetry_sector(&ops.jz, SymmetryKind::BitReversal, SectorParity::Even).unwrap();
        let (odd, _) = symmetry_sector(&ops.jz, SymmetryKind::BitReversal, SectorParity::Odd).unwrap();
        assert_eq!(even.dim(), 10);
        assert_eq!(odd.dim(), 6);
    }

    #[test]
    fn parity_sector_dimensions_are_balanced() {
        let ops = build_collective_ops(4, Representation::Full).unwrap();
        let (even, _) = symmetry_sector(&ops.jz, SymmetryKind::Parity, SectorParity::Even).unwrap();
        let (odd, _) = symmetry_sector(&ops.jz, SymmetryKind::Parity, SectorParity::Odd).unwrap();
        assert_eq!(even.dim(), 8);
        assert_eq!(odd.dim(), 8);
    }

    #[test]
    fn sector_blocks_preserve_the_spectrum() {
        // H = Jx² + 0.3 Jz² + 0.7 Jz commutes with both symmetries and is
        // not block-trivial, so the union of sector spectra must equal the
        // full spectrum, multiplicities included.
        let n = 5;
        let ops = build_collective_ops(n, Representation::Full).unwrap();
        let h = &ops.jx.matrix * &ops.jx.matrix
            + (&ops.jz.matrix * &ops.jz.matrix).scale(0.3)
            + ops.jz.matrix.scale(0.7);
        let h = Operator::hermitian(h, ops.jz.basis.clone()).unwrap();
        let (full_vals, _) = linalg::hermitian_eigen(&h.matrix).unwrap();
        for kind in [SymmetryKind::BitReversal, SymmetryKind::Parity] {
            let mut sector_vals = Vec::new();
            for parity in [SectorParity::Even, SectorParity::Odd] {
                let (block, _) = symmetry_sector(&h, kind, parity).unwrap();
                let (vals, _) = linalg::hermitian_eigen(&block.matrix).unwrap();
                sector_vals.extend(vals);
            }
            sector_vals.sort_by(f64::total_cmp);
            assert_eq!(sector_vals.len(), full_vals.len());
            for (a, b) in sector_vals.iter().zip(full_vals.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn sector_rejects_noncommuting_operator() {
        let jx = collective_op(3, Axis::X, Representation::Full).unwrap();
        let err = symmetry_sector(&jx, SymmetryKind::Parity, SectorParity::Even).unwrap_err();
        assert!(matches!(err, Error::SymmetryMismatch(_)), "got {err:?}");
    }

    #[test]
    fn spin_flip_blocks_preserve_the_spectrum() {
        // H = Jz² + 0.4 Jx flips onto itself, its blocks at N = 8 have
        // dimensions 5 and 4, and their spectra union to the full one.
        let n = 8;
        let ops = build_collective_ops(n, Representation::Symmetric).unwrap();
        let h = &ops.jz.matrix * &ops.jz.matrix + ops.jx.matrix.scale(0.4);
        let h = Operator::hermitian(h, ops.jz.basis.clone()).unwrap();
        let (full_vals, _) = linalg::hermitian_eigen(&h.matrix).unwrap();

        let (even, odd) = spin_flip_blocks(&h).unwrap();
        assert_eq!((even.basis.dimension, odd.basis.dimension), (5, 4));
        let mut vals = linalg::hermitian_eigen(&even.matrix).unwrap().0;
        vals.extend(linalg::hermitian_eigen(&odd.matrix).unwrap().0);
        vals.sort_by(f64::total_cmp);
        for (a, b) in vals.iter().zip(full_vals.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn spin_flip_keeps_the_operator_kind_and_rejects_odd_generators() {
        // A flip-even unitary splits into unitary blocks.
        let jx = collective_op(6, Axis::X, Representation::Symmetric).unwrap();
        let u = linalg::exp_i_hermitian(&jx.matrix, -0.8).unwrap();
        let u = Operator::unitary(u, jx.basis.clone()).unwrap();
        let (even, odd) = spin_flip_blocks(&u).unwrap();
        assert_eq!(even.kind, OperatorKind::Unitary);
        assert_eq!(even.basis.dimension + odd.basis.dimension, 7);

        // Jz is flip-odd, and the full representation has no ladder.
        let jz = collective_op(6, Axis::Z, Representation::Symmetric).unwrap();
        assert!(matches!(spin_flip_blocks(&jz), Err(Error::SymmetryMismatch(_))));
        let full = collective_op(3, Axis::X, Representation::Full).unwrap();
        assert!(matches!(spin_flip_blocks(&full), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn sector_state_projection_checks_weight() {
        let n = 4;
        let basis = BasisDescriptor::full(n);
        let ops = build_collective_ops(n, Representation::Full).unwrap();
        let (_, proj) = symmetry_sector(&ops.jz, SymmetryKind::BitReversal, SectorParity::Even).unwrap();

        // The all-up state is a palindrome: fully inside the even sector.
        let mut up = CVec::zeros(1 << n);
        up[0] = C64::new(1.0, 0.0);
        let up = StateVector::new(up, basis.clone()).unwrap();
        let projected = proj.project_state(&up).unwrap();
        assert_abs_diff_eq!(projected.norm(), 1.0, epsilon = 1e-12);
        let back = proj.embed_state(&projected).unwrap();
        assert_abs_diff_eq!(back.inner(&up).unwrap().re, 1.0, epsilon = 1e-12);

        // A lone non-palindromic basis state has half its weight in each
        // sector, so projecting it must fail.
        let mut lop = CVec::zeros(1 << n);
        lop[1] = C64::new(1.0, 0.0);
        let lop = StateVector::new(lop, basis).unwrap();
        assert!(proj.project_state(&lop).is_err());
    }

    #[test]
    fn sector_traces_add_up() {
        let n = 4;
        let ops = build_collective_ops(n, Representation::Full).unwrap();
        let mut tr = 0.0;
        let mut tr2 = 0.0;
        for parity in [SectorParity::Even, SectorParity::Odd] {
            let (block, _) = symmetry_sector(&ops.jz, SymmetryKind::BitReversal, parity).unwrap();
            tr += block.trace_real();
            tr2 += block.trace_square();
        }
        assert_abs_diff_eq!(tr, 0.0, epsilon = 1e-12);
        // Tr[Jz²] over the full basis is N 2^N / 4.
        assert_abs_diff_eq!(tr2, (n as f64) * (1 << n) as f64 / 4.0, epsilon = 1e-10);
    }

    #[test]
    fn capacity_cap_fires_before_allocation() {
        let err = collective_op(40, Axis::Z, Representation::Full).unwrap_err();
        assert!(matches!(err, Error::Capacity(_)), "got {err:?}");
        let err = coherent_spin_state(40, 1.0, 0.0, Representation::Full).unwrap_err();
        assert!(matches!(err, Error::Capacity(_)), "got {err:?}");
    }

    #[test]
    fn operator_constructors_validate() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(Operator::hermitian(m.clone(), BasisDescriptor::full(1)).is_err());
        assert!(Operator::unitary(m, BasisDescriptor::full(1)).is_err());
    }

    #[test]
    fn state_constructor_validates_norm() {
        let basis = BasisDescriptor::symmetric(1);
        let mut v = CVec::zeros(2);
        v[0] = C64::new(0.6, 0.0);
        v[1] = C64::new(0.7, 0.0);
        assert!(StateVector::new(v.clone(), basis.clone()).is_err());
        let fixed = StateVector::normalized_from(v, basis).unwrap();
        assert_abs_diff_eq!(fixed.norm(), 1.0, epsilon = 1e-15);
    }
}
