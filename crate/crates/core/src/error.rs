use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by decomposition, evaluation and file handling.
#[derive(Debug, Error)]
pub enum ScalpError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("unsupported format: {0}")]
    Format(String),
}

pub type Result<T, E = ScalpError> = std::result::Result<T, E>;

impl ScalpError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        ScalpError::InvalidParameter(msg.into())
    }

    pub(crate) fn dims(expected: impl ToString, actual: impl ToString) -> Self {
        ScalpError::DimensionMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ScalpError::Io {
            path: path.into(),
            source,
        }
    }
}
