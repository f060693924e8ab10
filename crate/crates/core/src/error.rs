use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value outside the admissible domain, e.g. a non-positive price.
    #[error("domain error at index {index}: {message}")]
    Domain { index: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: need {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("rank-deficient design matrix (column {column})")]
    RankDeficient { column: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("objective is not finite at the initial point")]
    NonFiniteObjective,

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
