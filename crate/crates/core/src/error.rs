use thiserror::Error;

/// Errors produced by the boundary-scan library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("orient must have unit norm (got norm {norm})")]
    NonUnitOrient { norm: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("solver found no feasible evaluation within a budget of {budget}")]
    NoFeasibleEvaluation { budget: usize },

    #[error("root finder did not converge after {iterations} iterations")]
    RootNotFound { iterations: usize },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("expression error at column {position}: {message}")]
    Expression { position: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
