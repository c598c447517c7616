use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the model, the ROM compiler and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid LFSR state: the all-zero state is absorbing")]
    ZeroLfsrState,

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid config `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("ROM build failed at address {address}: function value {value} is not finite")]
    Build { address: i64, value: f64 },

    #[error("ROM parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("domain of {points} points exceeds the exhaustive limit of {limit}; try a smaller m")]
    Capacity { points: u64, limit: u64 },

    #[error("draw log mismatch: expected {expected} draws, got {got}")]
    DrawCount { expected: usize, got: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: &str, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
