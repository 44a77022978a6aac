use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{path}:{line}: {kind}")]
    Csv {
        path: PathBuf,
        line: usize,
        kind: CsvErrorKind,
    },

    #[error("solver failed in round {round}: {reason}")]
    Solver { round: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CsvErrorKind {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("row has {found} fields, expected {expected}")]
    RowLength { expected: usize, found: usize },
    #[error("non-numeric cell `{0}`")]
    NonNumeric(String),
    #[error("expected {expected} data rows, found {found}")]
    RowCount { expected: usize, found: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure(cond: bool, name: &'static str, reason: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(invalid(name, reason()))
    }
}
