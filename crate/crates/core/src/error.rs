use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("row {row} ({word}): {message}")]
    Row {
        row: usize,
        word: String,
        message: String,
    },

    #[error("alignment failed for '{word}': {reason}")]
    Alignment { word: String, reason: String },

    #[error("unknown phoneme code '{0}'")]
    UnknownPhoneme(String),

    #[error("invalid character '{0}' in aligned spelling")]
    InvalidLetter(char),

    #[error("duplicate {what} '{key}'")]
    Duplicate { what: &'static str, key: String },

    #[error("unknown word '{0}'")]
    UnknownWord(String),

    #[error("missing weight column '{column}' for word '{word}'")]
    MissingColumn { column: String, word: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("checkpoint checksum mismatch or corrupted file")]
    Checksum,

    #[error("unsupported checkpoint: expected {expected} v{expected_version}, found {found} v{found_version}")]
    Version {
        expected: &'static str,
        expected_version: u32,
        found: String,
        found_version: u32,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 usage, 2 data, 3 runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) => 1,
            Error::Parse { .. }
            | Error::Row { .. }
            | Error::Alignment { .. }
            | Error::UnknownPhoneme(_)
            | Error::InvalidLetter(_)
            | Error::Duplicate { .. }
            | Error::UnknownWord(_)
            | Error::MissingColumn { .. }
            | Error::Checksum
            | Error::Version { .. }
            | Error::Json(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
