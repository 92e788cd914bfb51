use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pretraining batch: {0}")]
    InvalidPretrain(String),

    #[error("instance {index} has no label")]
    MissingLabel { index: u64 },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("learner has not been fitted")]
    NotFitted,

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("unknown {kind} '{name}'; available: {}", available.join(", "))]
    Registry {
        kind: &'static str,
        name: String,
        available: Vec<String>,
    },

    #[error("series is empty")]
    EmptySeries,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
