use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("accumulators were built against different dataset specs")]
    SpecMismatch,

    #[error("nothing to evaluate: no ground-truth tracks and no evaluated classes")]
    NothingToEvaluate,

    #[error("intersection {intersection} exceeds operand sizes ({a}, {b})")]
    InvalidOverlap { a: u64, b: u64, intersection: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },

    #[error("{path}: io error: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn file(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::File {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
