use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used to pick a process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("input shape mismatch: expected {expected}, got {actual}")]
    InputShape { expected: String, actual: String },

    #[error("non-finite value produced at layer {layer}")]
    NumericOverflow { layer: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dataset is missing class {0}")]
    ClassMissing(u8),

    #[error("majority class ({majority} rows) must be larger than minority class ({minority} rows)")]
    InsufficientMajority { majority: usize, minority: usize },

    #[error("cannot split: {0}")]
    Split(String),

    #[error("cannot fit classifier: {0}")]
    Fit(String),

    #[error("{0}")]
    Domain(String),

    #[error("{path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("invalid file format in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("ensemble component {index}: {source}")]
    Component {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::InputShape {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidConfig(_) | Error::InvalidParameter(_) => ErrorKind::Usage,
            Error::NumericOverflow { .. } => ErrorKind::Numeric,
            Error::Component { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }
}
