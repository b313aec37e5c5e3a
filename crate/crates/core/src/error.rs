//! Error type shared by all modules.

/// Errors raised by construction and analysis operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A dimension argument was zero or otherwise unusable.
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    /// Vector/matrix shapes are inconsistent with each other.
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    /// An input violated a documented contract (non-unitary step,
    /// non-Hermitian Hamiltonian, unnormalized state, ...).
    #[error("contract violation: {0}")]
    ContractViolation(String),
    /// The operation is not defined for this shape (e.g. it requires
    /// system and clock dimensions to match).
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    /// A scalar argument was outside its admissible range.
    #[error("out of range: {0}")]
    OutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
