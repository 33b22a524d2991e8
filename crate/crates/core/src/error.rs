use thiserror::Error;

/// Errors raised for malformed input or violated preconditions.
///
/// Axiom violations of well-formed data are not errors; they are reported
/// through [`crate::ValidationReport`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for {what} (size {size})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },
    #[error("malformed structure: {0}")]
    Structural(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
