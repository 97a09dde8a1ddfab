use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("`{key}` = {value} is out of range (expected {expected})")]
    Range {
        key: String,
        value: String,
        expected: String,
    },

    #[error("illegal move {mv} in position:\n{board}")]
    IllegalMove { mv: usize, board: String },

    #[error("search rejected a terminal position")]
    TerminalState,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("corrupt checkpoint {path}: {reason}")]
    CorruptCheckpoint { path: PathBuf, reason: String },

    #[error("checkpoint {path} does not match this run: {reason}")]
    CheckpointMismatch { path: PathBuf, reason: String },

    #[error("resume refused: config hash {found} in {dir} differs from requested {expected}")]
    ConfigMismatch {
        dir: PathBuf,
        found: String,
        expected: String,
    },

    #[error("rating graph is disconnected: {0}")]
    Disconnected(String),

    #[error("missing input {0}")]
    MissingInput(PathBuf),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
