use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("annotation line {line}: {message}")]
    Annotation { line: usize, message: String },

    #[error("annotation line {line}: missing required field '{field}'")]
    MissingField { line: usize, field: String },

    #[error("unknown doc_id '{0}' in annotation file")]
    UnknownDocId(String),

    #[error("format error in record '{record}': {message}")]
    Format { record: String, message: String },

    #[error("not enough {level} documents: {available} available, {requested} requested")]
    Capacity {
        level: String,
        available: usize,
        requested: usize,
    },

    #[error("cache line {line}: {message}")]
    Cache { line: usize, message: String },

    #[error("transport error: {0}")]
    Transport(String),

    #[error("endpoint returned HTTP {status}: {body}")]
    Endpoint { status: u16, body: String },

    #[error("shape mismatch: expected {expected} features, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("exemplar leakage: {0}")]
    Leakage(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}
