//! Dense linear algebra kernels over complex doubles.
//!
//! Everything downstream works with `DMatrix<Complex64>`, so this module
//! centralizes the handful of numerically delicate operations:
//!
//! - Hermitian eigendecompositions (with a fast path for matrices whose
//!   imaginary parts are identically zero, which covers the spin-chain
//!   Hamiltonians and most collective generators).
//! - Eigendecomposition of unitary matrices through the commuting Hermitian
//!   pair `A = (U + U†)/2`, `B = (U − U†)/2i`. Eigenvectors of `A` are
//!   refined inside near-degenerate clusters by diagonalizing `B` restricted
//!   to the cluster, which resolves the `cos θ` ambiguity between `±θ` and
//!   keeps exactly degenerate pairs (Kramers doublets) intact.
//! - Unitary matrix exponentials `exp(i s H)` of Hermitian generators by
//!   exact eigendecomposition, never by series truncation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Eigenvalue clusters closer than this are treated as degenerate when
/// diagonalizing unitaries. The scale is absolute: the clustered values are
/// `cos θ`, `sin θ` and live in `[-1, 1]`.
const CLUSTER_TOL: f64 = 1e-8;

/// Largest absolute entry of the difference from the conjugate transpose.
pub fn hermiticity_error(m: &CMat) -> f64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "hermiticity_error: matrix must be square");
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Largest absolute entry of `U U† − 1`.
pub fn unitarity_error(m: &CMat) -> f64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "unitarity_error: matrix must be square");
    let prod = m * m.adjoint();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            let d = (prod[(i, j)] - expected).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Sum of squared absolute entries. For Hermitian `M` this equals `Tr[M²]`.
pub fn frobenius_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_finite(m: &CMat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::numerical("matrix contains non-finite entries"))
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the matching eigenvector
/// columns. The input is symmetrized as `(M + M†)/2` before factorization so
/// that roundoff off the Hermitian manifold cannot leak into complex
/// eigenvalues; callers enforce their own hermiticity tolerances.
pub fn hermitian_eigen(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    check_finite(m)?;
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "hermitian_eigen: matrix must be square");
    if m.iter().all(|z| z.im == 0.0) {
        return real_symmetric_eigen(m);
    }
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Fast path: the matrix is exactly real, so factor it as a real symmetric
/// matrix and lift the eigenvectors back to complex storage.
fn real_symmetric_eigen(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = m.nrows();
    let real = DMatrix::<f64>::from_fn(n, n, |i, j| 0.5 * (m[(i, j)].re + m[(j, i)].re));
    let eig = real.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, dst)] = C64::new(eig.eigenvectors[(r, src)], 0.0);
        }
    }
    Ok((values, vectors))
}

/// Eigendecomposition of a unitary matrix.
///
/// Returns eigenphases `θ ∈ (−π, π]` in ascending order together with the
/// eigenvector columns, so that `U = V diag(e^{iθ}) V†`.
///
/// The phases are recovered from Rayleigh quotients of the commuting
/// Hermitian pair `A = (U + U†)/2` and `B = (U − U†)/2i`, which keeps each
/// phase accurate even inside clusters that the `A`-eigensolver could not
/// separate on its own.
pub fn unitary_eigen(u: &CMat) -> Result<(Vec<f64>, CMat)> {
    check_finite(u)?;
    let n = u.nrows();
    assert_eq!(n, u.ncols(), "unitary_eigen: matrix must be square");
    let ut = u.adjoint();
    let mut a = CMat::zeros(n, n);
    let mut b = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let s = u[(i, j)] + ut[(i, j)];
            let d = u[(i, j)] - ut[(i, j)];
            a[(i, j)] = C64::new(0.5 * s.re, 0.5 * s.im);
            // (U - U†)/2i: multiply by -i/2.
            b[(i, j)] = C64::new(0.5 * d.im, -0.5 * d.re);
        }
    }
    let (a_vals, mut vectors) = hermitian_eigen(&a)?;

    // Resolve clusters of near-equal cos θ by diagonalizing B within them.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && a_vals[end] - a_vals[end - 1] < CLUSTER_TOL {
            end += 1;
        }
        let d = end - start;
        if d > 1 {
            let w = vectors.columns(start, d).clone_owned();
            let small = w.adjoint() * &b * &w;
            let (_, s) = hermitian_eigen(&small)?;
            let refined = w * s;
            vectors.columns_mut(start, d).copy_from(&refined);
        }
        start = end;
    }

    let mut phases = Vec::with_capacity(n);
    for j in 0..n {
        let v = vectors.column(j);
        let av = &a * v;
        let bv = &b * v;
        let c: C64 = v.dotc(&av);
        let s: C64 = v.dotc(&bv);
        phases.push(s.re.atan2(c.re));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| phases[i].total_cmp(&phases[j]));
    let sorted_phases: Vec<f64> = order.iter().map(|&i| phases[i]).collect();
    let mut sorted_vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted_vectors.set_column(dst, &vectors.column(src));
    }
    Ok((sorted_phases, sorted_vectors))
}

/// `exp(i s H)` for Hermitian `H`, by exact eigendecomposition.
pub fn exp_i_hermitian(h: &CMat, scale: f64) -> Result<CMat> {
    let (values, vectors) = hermitian_eigen(h)?;
    let n = h.nrows();
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, scale * lambda);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    Ok(scaled * vectors.adjoint())
}

/// Frobenius norm of `V diag(f(values)) V† − M`, the reconstruction residual
/// of a spectral decomposition under an arbitrary eigenvalue map `f`.
pub fn reconstruction_error<F>(m: &CMat, values: &[f64], vectors: &CMat, f: F) -> f64
where
    F: Fn(f64) -> C64,
{
    let n = m.nrows();
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let fv = f(lambda);
        for i in 0..n {
            scaled[(i, j)] *= fv;
        }
    }
    let rebuilt = scaled * vectors.adjoint();
    (rebuilt - m).norm()
}
