use thiserror::Error;

/// Errors raised across the crate.
///
/// Every variant maps onto one of three categories (validation, numeric, I/O)
/// which the command-line front end turns into distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("non-finite value {value} when evaluating at {location}")]
    NonFinite { value: f64, location: String },

    #[error("coefficient {index} is zero; restrict the fit with a parity filter")]
    ZeroCoefficient { index: usize },

    #[error("coefficient {index} = {value:e} is negative beyond tolerance {tolerance:e}")]
    PositivityViolation {
        index: usize,
        value: f64,
        tolerance: f64,
    },

    #[error("covariance is not positive semi-definite (failed at jitter {jitter:e})")]
    NotPositiveDefinite { jitter: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Coarse error classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Validation,
    Numeric,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Validation => 2,
            ErrorCategory::Numeric => 3,
            ErrorCategory::Io => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Validation => "validation",
            ErrorCategory::Numeric => "numeric",
            ErrorCategory::Io => "io",
        }
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Domain(_) | Error::DimensionMismatch { .. } | Error::Validation(_) => {
                ErrorCategory::Validation
            }
            Error::NonFinite { .. }
            | Error::ZeroCoefficient { .. }
            | Error::PositivityViolation { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::Numeric(_) => ErrorCategory::Numeric,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => ErrorCategory::Io,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
