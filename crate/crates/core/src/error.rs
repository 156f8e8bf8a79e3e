use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by dataset loading, rule mining, model training, and
/// artifact IO.
#[derive(Debug, Error)]
pub enum TkgError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite loss at timestamp {timestamp}: {detail}")]
    NonFiniteLoss { timestamp: usize, detail: String },

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, TkgError>;

impl TkgError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TkgError::Io {
            path: path.into(),
            source,
        }
    }
}
