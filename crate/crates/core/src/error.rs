use thiserror::Error;

/// Errors raised by the engine's numerical and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("wavenumber must be positive, got {0} cm^-1")]
    NonPositiveWavenumber(f64),

    #[error("spectrum structure: {0}")]
    Structure(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("no polariton splitting: {0}")]
    NoSplitting(String),

    #[error("fit rejected: {0}")]
    FitRejected(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
