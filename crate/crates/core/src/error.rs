use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("invalid identity profile: {0}")]
    InvalidProfile(String),

    /// gamma is zero and no identity object sits at distance zero, so every
    /// attenuation factor vanishes.
    #[error("degenerate profile: gamma = 0 with all distances > 0")]
    DegenerateProfile,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("identity index {index} out of range for {len} identity objects")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("incomplete epoch: {recorded} runs recorded, expected {expected}")]
    IncompleteEpoch { recorded: usize, expected: usize },

    #[error("unknown agent id {0}")]
    UnknownAgent(usize),

    /// A configuration value failed validation. `field` names the offending key.
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user-supplied configuration rather than
    /// by the run itself.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::Parse { .. }
                | Error::InvalidSchema(_)
                | Error::InvalidProfile(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
