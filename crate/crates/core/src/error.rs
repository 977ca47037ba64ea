use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Variants fall in two families: validation failures (bad parameters,
/// malformed inputs) and numeric failures (factorizations or quadratures
/// that did not succeed). The CLI maps them to exit codes 2 and 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-uniform time grid at index {index}: step {step} differs from {expected}")]
    NonUniformGrid {
        index: usize,
        step: f64,
        expected: f64,
    },

    #[error(
        "non-positive concentration {value} at index {index}; the concentration process \
         stops at its first zero (tau0) and such observations are rejected"
    )]
    NonPositiveConcentration { index: usize, value: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("Cholesky factorization failed for a {dim}x{dim} matrix after jitter up to {jitter:e}")]
    Cholesky { dim: usize, jitter: f64 },

    #[error("singular covariance matrix (condition estimate {condition:e})")]
    SingularCovariance { condition: f64 },

    #[error("quadrature did not converge: estimated error {achieved:e} > requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of a numerical routine rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Cholesky { .. } | Error::SingularCovariance { .. } | Error::Quadrature { .. }
        )
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 1,
            e if e.is_numeric() => 3,
            _ => 2,
        }
    }
}

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}
