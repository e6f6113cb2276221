use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: rating {rating} outside scale [{min}, {max}]")]
    RatingOutOfScale {
        line: u64,
        rating: f64,
        min: f64,
        max: f64,
    },

    #[error("duplicate metadata for movie {0}")]
    DuplicateMetadata(String),

    #[error("duplicate token {0}")]
    DuplicateToken(String),

    #[error("invalid token {0:?}: {1}")]
    InvalidToken(String, String),

    #[error("vocabulary is empty after applying min_count {0}")]
    EmptyVocabulary(u64),

    #[error("empty context")]
    EmptyContext,

    #[error("no in-vocabulary sentence of length >= 2")]
    EmptyCorpus,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("zero vector cannot be compared by cosine")]
    ZeroVector,

    #[error("unknown token {0}")]
    UnknownToken(String),

    #[error("{0} has no usable representation")]
    Unqueryable(String),

    #[error("query vectors cancel out to the zero vector")]
    DegenerateQuery,

    #[error("expected {expected} values, got {actual}")]
    CountMismatch { expected: usize, actual: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

impl Error {
    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
