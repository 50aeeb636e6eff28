use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("singular system: the inpainting mask is empty")]
    EmptyMask,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("image data contains non-finite values")]
    NonFinite,

    #[error("problem too large for the dense oracle: {pixels} pixels (limit {limit})")]
    TooLarge { pixels: usize, limit: usize },

    #[error("malformed image file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn shape(expected: impl std::fmt::Display, actual: impl std::fmt::Display) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
