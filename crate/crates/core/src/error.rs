use thiserror::Error;

/// Failure raised by a user-supplied map, distance or potential.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct MapError(pub String);

impl MapError {
    pub fn new(msg: impl Into<String>) -> Self {
        MapError(msg.into())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient prefix: need {needed} items, have {available}")]
    InsufficientPrefix { needed: usize, available: usize },

    #[error("evaluation failed at index {index}: {message}")]
    Evaluation { index: usize, message: String },

    #[error("monotonicity violation: {0}")]
    MonotonicityViolation(String),

    #[error("premise violation: {0}")]
    PremiseViolation(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn eval(index: usize, err: impl std::fmt::Display) -> Self {
        Error::Evaluation {
            index,
            message: err.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
