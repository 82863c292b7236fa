use std::io;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid MDP: {0}")]
    InvalidSpec(String),

    #[error("shape mismatch: left has {left} entries, right has {right}")]
    ShapeMismatch { left: usize, right: usize },

    #[error("value {value} at index {index} is outside the declared range [{lo}, {hi}]")]
    OutOfRange {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("operation needs a Markov policy: {0}")]
    NonMarkov(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("incompatible configuration: {0}")]
    Incompatible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
