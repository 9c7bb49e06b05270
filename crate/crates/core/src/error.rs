use thiserror::Error;

/// Errors raised by the laboratory. Precondition failures are kept distinct
/// from bound or invariant violations so the runner can map them to
/// different exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("required precision of {required} bits exceeds the cap of {cap} bits")]
    PrecisionCap { required: u64, cap: u64 },

    #[error("point {index} still straddles an integer after {retries} precision doublings")]
    Straddle { index: usize, retries: u32 },

    #[error("input of size {size} exceeds the limit of {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("quadrature budget of {budget} evaluations exhausted (achieved error bound {achieved:e})")]
    QuadratureBudget { budget: usize, achieved: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid(msg: impl Into<String>) -> LabError {
    LabError::InvalidArgument(msg.into())
}
