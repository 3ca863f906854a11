use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Constant or otherwise undecidable input (zero variance, too few distinct values).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Shape or value violations: mismatched lengths, non-finite values, bad parameters.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported conditioning dimension {0} (only one-dimensional z is supported)")]
    UnsupportedDimension(usize),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("regression fit failed: {0}")]
    FitFailure(String),

    #[error("{}:{line}: {message}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },

    #[error("missing metadata: {}", .0.display())]
    MissingMetadata(PathBuf),

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
