use num_complex::Complex64;
use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure: {message} (residual {residual:.3e})")]
    NumericFailure { message: String, residual: f64 },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("degenerate estimate: {0}")]
    DegenerateEstimate(String),

    #[error("ambiguous leading eigenvalue: {first} and {second} have equal modulus")]
    Ambiguous { first: Complex64, second: Complex64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
