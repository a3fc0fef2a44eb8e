//! Ingestion errors.

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("inconsistent indentation at line {line}")]
    Indentation { line: usize },

    #[error("schema violation at {path}: {message}")]
    Json { path: String, message: String },

    #[error("csv error at record {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("bad csv header: expected columns {expected}, got \"{found}\"")]
    Header { expected: String, found: String },

    #[error("duplicate vulnerability id {id}")]
    DuplicateRecord { id: String },

    #[error("invalid value at {at}: {message}")]
    InvalidValue { at: String, message: String },

    #[error("missing release dates for: {}", offenders.join(", "))]
    MissingReleaseDates { offenders: Vec<String> },

    #[error(transparent)]
    Model(#[from] ModelError),
}
