//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Container file does not start with the expected magic bytes.
    #[error("bad magic in container header")]
    BadMagic,
    /// Header dimensions overflow or exceed addressable memory.
    #[error("container dimension overflow: {0}")]
    DimOverflow(String),
    /// File ended before the payload declared by the header.
    #[error("container payload truncated")]
    Truncated,
    /// Header is well-formed but describes a layout this crate does not read.
    #[error("unsupported container layout: {0}")]
    UnsupportedLayout(String),
    /// Dataset manifest disagrees with the files on disk.
    #[error("manifest mismatch: {0}")]
    ManifestMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("manifest json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }
}
