//! Error taxonomy shared by every module of the crate.
//!
//! The variants deliberately mirror the failure classes a caller can act on:
//! mismatched bases, exceeded capacity limits, violated preconditions, and
//! genuine numerical breakdowns. Anything that indicates a programming error
//! inside this crate (shape mismatches in internal kernels) panics instead.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    /// Two objects that must share a basis (same representation, qubit
    /// count, dimension, and sector label) do not.
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    /// A full-representation or grid request exceeds the configured memory
    /// capacity.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Input violates a documented precondition (wrong operator kind, even
    /// qubit count where odd is required, undersized sample, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested symmetry does not commute with the operator.
    #[error("symmetry mismatch: {0}")]
    SymmetryMismatch(String),

    /// A matrix failed a structural invariant (hermiticity, unitarity,
    /// normalization) beyond the documented tolerance.
    #[error("structural invariant violated: {0}")]
    Structure(String),

    /// An iterative numerical routine failed to converge or produced
    /// non-finite values.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn basis(msg: impl Into<String>) -> Self {
        Error::BasisMismatch(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn symmetry(msg: impl Into<String>) -> Self {
        Error::SymmetryMismatch(msg.into())
    }

    pub fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
