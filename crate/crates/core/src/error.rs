use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid tensor order: {0}")]
    InvalidOrder(String),
    #[error("invalid contraction index r = {r} for orders {p} and {q}")]
    InvalidContraction { r: usize, p: usize, q: usize },
    #[error("kernels live in different Gram spaces")]
    SpaceMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Gram matrix is not symmetric positive semidefinite: {0}")]
    NotPsd(String),
    #[error("invalid multi-index: {0}")]
    InvalidIndex(String),
    #[error("moment computation too large: {0}")]
    Complexity(String),
    #[error("chaos expansion is not centered (constant term {0})")]
    NotCentered(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("variance series diverges: {0}")]
    Divergence(String),
    #[error("operation budget exceeded: {0}")]
    ResourceLimit(String),
    #[error("density is not centered: mean {0:e}")]
    CenteringError(f64),
    #[error("density support violation: {0}")]
    SupportError(String),
    #[error("tau does not determine a unique density: {0}")]
    NonUniqueness(String),
    #[error("quadrature failed: {0}")]
    Accuracy(String),
    #[error("integrability check failed: {0}")]
    Integrability(String),
    #[error("empty sample")]
    EmptySample,
    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
