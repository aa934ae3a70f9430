//! Numerical toolkit for chaotic collective-spin and spin-chain dynamics.
//!
//! The crate builds kicked-top Floquet maps and spin-chain Hamiltonians,
//! evolves pure states exactly through spectral decompositions, and measures
//! how the quantum Fisher information (QFI) of the evolved state saturates
//! against dimension-counting predictions for the explored Krylov space.
//! Around that core sit the standard chaos diagnostics: level-spacing
//! statistics against the Wigner surmises, classical Lyapunov exponents of
//! the corresponding sphere maps, and spin Wigner quasi-probability fields.
//!
//! Modules:
//! - [`spin`]: collective spin operators, coherent states, symmetry sectors.
//! - [`models`]: the concrete Floquet maps and Hamiltonians under study.
//! - [`dynamics`]: spectral decompositions, state evolution, QFI traces,
//!   Krylov dimensions.
//! - [`rmt`]: spacing samples, Wigner surmises, random-state QFI averages.
//! - [`predict`]: closed-form QFI plateau predictions and entanglement
//!   depth certification.
//! - [`classical`]: classical sphere maps, Lyapunov exponents, phase
//!   diagrams.
//! - [`wigner`]: spherical-harmonic Wigner fields and rotation-fidelity
//!   widths.

pub mod classical;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod models;
pub mod predict;
pub mod rmt;
pub mod spin;
pub mod tol;
pub mod wigner;

pub use error::{Error, Result};
