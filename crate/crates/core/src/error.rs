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

    #[error("{file}: expected header `{expected}`, found `{found}`")]
    Header {
        file: String,
        expected: String,
        found: String,
    },

    #[error("{file}:{line}: {message}")]
    Row { file: String, line: u64, message: String },

    #[error("{file}:{line}: duplicate patient_id `{id}`")]
    DuplicatePatient { file: String, line: u64, id: String },

    #[error("{file}:{line}: unknown patient `{id}`")]
    UnknownPatient { file: String, line: u64, id: String },

    #[error("invalid read code `{0}`")]
    InvalidReadCode(String),

    #[error("rollup level {0} out of range 1..=5")]
    InvalidLevel(u8),

    #[error("unknown drug `{0}`")]
    UnknownDrug(String),

    #[error("unknown read code `{0}`")]
    UnknownEvent(String),

    #[error("unknown extractor `{0}`")]
    UnknownExtractor(String),

    #[error("degenerate feature matrix: {0}")]
    DegenerateMatrix(String),

    #[error("scenario config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    Param(String),
}

impl Error {
    pub(crate) fn row(file: &str, line: u64, message: impl Into<String>) -> Self {
        Error::Row {
            file: file.to_string(),
            line,
            message: message.into(),
        }
    }
}
