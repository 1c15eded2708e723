use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("image decode failed: {0}")]
    Decode(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("gray levels must be in [2, 256], got {0}")]
    LevelsOutOfRange(usize),

    #[error("window size {window} does not fit a {width}x{height} image")]
    WindowTooLarge {
        window: usize,
        width: usize,
        height: usize,
    },

    #[error("window size must be at least 2, got {0}")]
    WindowTooSmall(usize),

    #[error("{width}x{height} window has no pixel pairs for direction {direction}")]
    NoPixelPairs {
        width: usize,
        height: usize,
        direction: &'static str,
    },

    #[error("empty co-occurrence matrix")]
    EmptyGlcm,

    #[error("non-finite feature component")]
    NonFinite,

    #[error("no feature vectors to aggregate")]
    EmptyInput,

    #[error("training window {index} has an infinite distance to the mean vector")]
    InconsistentTraining { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported model version {0}")]
    UnsupportedVersion(u64),

    #[error("malformed model: {0}")]
    MalformedModel(String),

    #[error("grid mismatch: expected {expected:?}, got {actual:?}")]
    GridMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("mask contains value {0}; only 0 and 255 are allowed")]
    InvalidMask(u8),

    #[error("region {0:?} lies outside the image")]
    RegionOutOfBounds(crate::eval::Region),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
