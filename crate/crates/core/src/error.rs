use thiserror::Error;

/// Errors raised by the numerical routines and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdrError {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid vector: {0}")]
    InvalidVector(String),
    #[error("covariance matrix is singular or not positive definite (min eigenvalue {min_eigenvalue:e})")]
    SingularCovariance { min_eigenvalue: f64 },
    #[error("matrix is rank deficient (singular value ratio {ratio:e})")]
    RankDeficient { ratio: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("method {0} requires a kernel specification")]
    MissingKernelSpec(&'static str),
    #[error("method {0} supports univariate responses only")]
    UnivariateOnly(&'static str),
    #[error("{slices} slices requested for {n} observations")]
    TooManySlices { slices: usize, n: usize },
    #[error("slice {slice} has {size} observations, need at least 2")]
    SliceTooSmall { slice: usize, size: usize },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, SdrError>;
