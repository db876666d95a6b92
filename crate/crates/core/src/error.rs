use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("cache {path}: {kind}")]
    Cache { path: PathBuf, kind: CacheErrorKind },

    #[error("missing cache: {0}")]
    MissingCache(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Failure modes of the binary orbit cache.
#[derive(Debug, Clone, PartialEq)]
pub enum CacheErrorKind {
    BadMagic,
    VersionMismatch { found: u32, expected: u32 },
    ChecksumMismatch { stored: u64, computed: u64 },
    Truncated { expected: usize, found: usize },
    KindMismatch(String),
    Revalidation { index: usize, stored: f64, recomputed: f64 },
}

impl std::fmt::Display for CacheErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CacheErrorKind::BadMagic => write!(f, "bad magic"),
            CacheErrorKind::VersionMismatch { found, expected } => {
                write!(f, "format version {found}, expected {expected}")
            }
            CacheErrorKind::ChecksumMismatch { stored, computed } => {
                write!(f, "checksum mismatch (stored {stored:#018x}, computed {computed:#018x})")
            }
            CacheErrorKind::Truncated { expected, found } => {
                write!(f, "truncated body: expected {expected} bytes, found {found}")
            }
            CacheErrorKind::KindMismatch(msg) => write!(f, "lattice kind mismatch: {msg}"),
            CacheErrorKind::Revalidation { index, stored, recomputed } => write!(
                f,
                "record {index} distance {stored} does not match recomputed {recomputed}"
            ),
        }
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
