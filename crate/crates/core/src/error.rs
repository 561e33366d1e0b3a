use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("unsupported size: N = {size} exceeds the limit of {limit}")]
    UnsupportedSize { size: usize, limit: usize },

    #[error("invalid sequence step {step}: {reason}")]
    Validation { step: usize, reason: String },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("ill-conditioned input: {0}")]
    Conditioning(String),

    #[error("field evaluation undefined: {0}")]
    Domain(String),

    #[error("trap search failed after {iterations} iterations: {reason}")]
    SearchFailure {
        reason: String,
        iterations: usize,
        /// Positions (m) visited by the search, oldest first.
        trace: Vec<[f64; 3]>,
    },

    #[error("trap lost along transport at eta = {eta}: {reason}")]
    Trajectory { eta: f64, reason: String },

    #[error("missing parameter: {0}")]
    MissingParameter(&'static str),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
