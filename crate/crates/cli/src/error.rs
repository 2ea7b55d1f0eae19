use std::path::PathBuf;

use sdrkit::SdrError;
use thiserror::Error;

/// Errors surfaced by the command-line front end.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("column '{0}' not found in the header")]
    MissingColumn(String),
    #[error("row {row}, column '{column}': '{value}' is not a number")]
    NonNumericCell { row: usize, column: String, value: String },
    #[error("row {row}, column '{column}': cannot take the square root of {value}")]
    NegativeUnderSqrt { row: usize, column: String, value: f64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Sdr(#[from] SdrError),
}

impl CliError {
    /// 2 for configuration problems, 3 for bad input data, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::MissingColumn(_) => 2,
            CliError::NonNumericCell { .. }
            | CliError::NegativeUnderSqrt { .. }
            | CliError::Io { .. }
            | CliError::Csv(_)
            | CliError::Data(_) => 3,
            CliError::Sdr(e) => match e {
                SdrError::InvalidSpec(_)
                | SdrError::MissingKernelSpec(_)
                | SdrError::UnivariateOnly(_)
                | SdrError::TooManySlices { .. }
                | SdrError::DimensionMismatch(_) => 2,
                SdrError::InvalidMatrix(_)
                | SdrError::InvalidVector(_)
                | SdrError::TooFewSamples { .. }
                | SdrError::SliceTooSmall { .. } => 3,
                SdrError::SingularCovariance { .. } | SdrError::RankDeficient { .. } => 4,
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

/// An error tagged with the stage that produced it.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub error: CliError,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {}

pub trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, StageError>;
}

impl<T, E: Into<CliError>> Stage<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, StageError> {
        self.map_err(|e| StageError { stage, error: e.into() })
    }
}
