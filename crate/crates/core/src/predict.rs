//! Dimension-counting predictions for the saturated QFI.
//!
//! When dynamics spread a state uniformly (in the Haar sense) over a
//! `K`-dimensional space, the time-averaged QFI of a generator `O` is
//! pinned by two traces:
//!
//! ```text
//! F ≈ 4 Tr[O²]/K − 4 (Tr[O])²/K²        (leading order)
//! F_Haar = 4 Tr[O²]/(K+1) − 4 (Tr[O])²/(K (K+1))   (exact Haar mean)
//! ```
//!
//! The neglected terms are `O(Tr[O²]/K²)`, one power of `K` below the
//! leading value. For the collective spin `J_z` on the symmetric
//! multiplet (`K = N + 1`) the leading value is `N(N+2)/3`; on the full
//! `2^N`-dimensional space it collapses to `N`. That gap, polynomial
//! versus linear, is what makes the saturated QFI a witness of how much
//! of Hilbert space the dynamics can actually reach.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spin::Operator;

/// The trace data of one generator plus the prediction derived from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// Dimension of the space the traces were taken over.
    pub k: usize,
    pub trace_o: f64,
    pub trace_o2: f64,
    /// Leading-order saturation value `4 Tr[O²]/K − 4 Tr[O]²/K²`.
    pub leading_value: f64,
    /// Scale of the neglected terms, `Tr[O²]/K²`.
    pub remainder_scale: f64,
}

/// Prediction from explicit traces.
pub fn universal_qfi_from_traces(k: usize, trace_o: f64, trace_o2: f64) -> Prediction {
    assert!(k > 0, "prediction needs a nonzero dimension");
    let kf = k as f64;
    Prediction {
        k,
        trace_o,
        trace_o2,
        leading_value: 4.0 * trace_o2 / kf - 4.0 * trace_o * trace_o / (kf * kf),
        remainder_scale: trace_o2 / (kf * kf),
    }
}

/// Prediction for a Hermitian generator on its own space. Works for
/// sector blocks too: project the generator first, then predict.
pub fn universal_qfi(op: &Operator) -> Result<Prediction> {
    Ok(universal_qfi_from_traces(op.dim(), op.trace_real(), op.trace_square()))
}

/// Exact Haar average of the pure-state QFI over a `K`-dimensional
/// space: `4 Tr[O²]/(K+1) − 4 Tr[O]²/(K(K+1))`. Differs from the
/// leading value at relative order `1/K`.
pub fn haar_average_qfi(k: usize, trace_o: f64, trace_o2: f64) -> f64 {
    assert!(k > 0, "Haar average needs a nonzero dimension");
    let kf = k as f64;
    4.0 * trace_o2 / (kf + 1.0) - 4.0 * trace_o * trace_o / (kf * (kf + 1.0))
}

/// Saturation value of collective-spin QFI on the symmetric multiplet,
/// `N(N+2)/3`: the `J_z` traces there are `Tr[J_z] = 0` and
/// `Tr[J_z²] = j(j+1)(2j+1)/3` with `j = N/2`, `K = N+1`.
pub fn symmetric_prediction(n: usize) -> f64 {
    let nf = n as f64;
    nf * (nf + 2.0) / 3.0
}

/// Saturation value of collective-spin QFI on the full `2^N` space:
/// `Tr[J_z²] = N 2^N / 4` and `K = 2^N` leave exactly `N`, the
/// shot-noise level.
pub fn full_space_prediction(n: usize) -> f64 {
    n as f64
}

/// Entanglement depth witnessed by a QFI value on `n` spins.
///
/// A state that is `k`-producible (no entangled block larger than `k`
/// spins, blocks of size `k` and one remainder of size `n mod k`)
/// satisfies `F ≤ s k² + r²` with `s = ⌊n/k⌋`, `r = n mod k`. The
/// witnessed depth is the smallest `k` whose bound the value does not
/// violate; `F = n` is consistent with a product state (depth 1) and
/// `F = n²` forces genuine `n`-partite entanglement.
pub fn entanglement_depth(qfi: f64, n: usize) -> usize {
    assert!(n > 0, "entanglement depth needs at least one spin");
    for k in 1..=n {
        let s = (n / k) as f64;
        let r = (n % k) as f64;
        let bound = s * (k * k) as f64 + r * r;
        // Saturating a bound exactly is still consistent with depth k.
        if qfi <= bound * (1.0 + 1e-12) + 1e-12 {
            return k;
        }
    }
    n
}
