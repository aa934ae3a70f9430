//! Numerical tolerances used across the crate.
//!
//! Every validation threshold lives here with a note on where it comes
//! from, so a failing assertion points at one documented number instead
//! of a magic literal buried in a builder. The values fall into two
//! groups: *construction* tolerances, which guard exact algebraic
//! identities against floating-point roundoff, and *detection*
//! tolerances, which decide when two nearly equal floating-point
//! results should be treated as the same physical object (degenerate
//! levels, Kramers partners).

/// Hermiticity defect allowed when constructing a Hermitian operator,
/// measured as `max_ij |M_ij - conj(M_ji)|`. Operator builders assemble
/// matrices entrywise from real couplings, so the defect is exactly
/// zero or a few ulps; anything larger signals a construction bug.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Unitarity defect allowed when constructing a Floquet operator,
/// measured as `max_ij |(U U^dag - 1)_ij|`. Floquet unitaries are
/// products of matrix exponentials obtained from eigendecompositions,
/// which lose a little more than entrywise assembly does.
pub const UNITARY_TOL: f64 = 1e-10;

/// Norm defect `|<psi|psi> - 1|` allowed when constructing a state.
pub const STATE_NORM_TOL: f64 = 1e-12;

/// Norm drift tolerated after unitary time evolution, before the
/// evolved amplitudes are renormalized. Evolution through a spectral
/// decomposition accumulates roundoff from two dense mat-vecs, so this
/// is looser than [`STATE_NORM_TOL`]; exceeding it means the
/// decomposition itself is broken.
pub const EVOLVED_NORM_TOL: f64 = 1e-8;

/// Commutator defect allowed when projecting an operator onto a
/// symmetry sector. Measured entrywise against the exact permutation
/// (or sign) action of the symmetry on the computational basis.
pub const SECTOR_COMMUTE_TOL: f64 = 1e-9;

/// Weight a state may carry outside a sector and still be projected.
pub const SECTOR_WEIGHT_TOL: f64 = 1e-9;

/// Relative residual below which a Krylov chain is declared exhausted.
pub const KRYLOV_RESIDUAL_TOL: f64 = 1e-10;

/// Two eigenphases closer than this are treated as one degenerate
/// level when counting distinct eigenspaces or merging Kramers pairs.
pub const DEGENERACY_MERGE_TOL: f64 = 1e-8;

/// Mean level spacing must equal one within this after unfolding.
pub const UNIT_MEAN_TOL: f64 = 1e-6;
