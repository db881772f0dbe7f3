use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),

    #[error("corrupt audio file: {0}")]
    CorruptFile(String),

    #[error("channel {index} out of range for {channels}-channel buffer")]
    InvalidChannel { index: usize, channels: usize },

    #[error("signal has {len} samples, fewer than one analysis window of {window}")]
    TooShort { len: usize, window: usize },

    #[error("every frame was discarded by pre-processing")]
    EmptyAfterPreprocessing,

    #[error("band ({low_hz}, {high_hz}] Hz holds {bins} bins; at least 2 are required")]
    DegenerateBand { low_hz: f64, high_hz: f64, bins: usize },

    #[error("measure not computable: {0}")]
    NotComputable(String),

    #[error("target source is active in every frame; no noise-only frames to analyze")]
    TargetAlwaysActive,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
