use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("target column '{0}' not found in header")]
    MissingTargetColumn(String),

    #[error("dataset is empty")]
    EmptyDataset(),

    #[error("missing value in column '{column}' at row {row}")]
    MissingValue { column: String, row: usize },

    #[error("non-numeric value '{value}' in numeric column '{column}' at row {row}")]
    NonNumericValue {
        column: String,
        row: usize,
        value: String,
    },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("malformed one-hot block for feature '{feature}': {set_count} indicators set")]
    MalformedOneHot { feature: String, set_count: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training data contains a single class; need at least 2")]
    SingleClass,

    #[error("feature '{0}' is not mutable")]
    ImmutableFeature(String),

    #[error("model backend failure: {0}")]
    Backend(String),

    #[error("wire protocol violation: {0}")]
    Protocol(String),

    #[error("external model timed out after {0:?}")]
    Timeout(std::time::Duration),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
