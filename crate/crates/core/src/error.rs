use std::path::PathBuf;

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument was outside its documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A projection grid violates the layout constraints of its format.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Two images (or an image and a grid/weight map) disagree on shape.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A metric had nothing to measure (no active pixels, all-zero weights).
    #[error("empty measurement domain: {0}")]
    EmptyDomain(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("malformed file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error on {path}: {source}")]
    Codec {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("config error at line {line}: {reason}")]
    Config { line: usize, reason: String },

    /// The external upscaler failed, timed out or produced unusable output.
    #[error("external upscaler: {0}")]
    External(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// True for failures that originate in file handling rather than computation.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io { .. } | Error::Codec { .. } | Error::Malformed { .. } | Error::UnsupportedFormat(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
