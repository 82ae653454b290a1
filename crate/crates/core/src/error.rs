use thiserror::Error;

/// Errors raised while building instances or evaluating them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("packing construction failed: {attempts} candidate draws exhausted for d={d}, m={m}")]
    ConstructionFailed { d: usize, m: usize, attempts: usize },

    #[error("point outside the domain: norm {norm} exceeds radius {radius}")]
    DomainViolation { norm: f64, radius: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
