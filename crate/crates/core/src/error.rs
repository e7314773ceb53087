use std::path::PathBuf;

use thiserror::Error;

use crate::protocol::Side;

#[derive(Debug, Error)]
pub enum Error {
    #[error("issue index {index} out of range for a domain with {count} issues")]
    IssueOutOfRange { index: usize, count: usize },
    #[error("dimension mismatch: expected {expected} values, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("value {value} for issue {index} is outside [0, 1]")]
    ValueOutOfRange { index: usize, value: f64 },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid preference profile `{name}`: {reason}")]
    InvalidProfile { name: String, reason: String },
    #[error("invalid time tactic: {0}")]
    InvalidTactic(String),
    #[error("normalized time {0} is outside [0, 1]")]
    TimeOutOfRange(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("protocol violation by {side}: {reason}")]
    ProtocolViolation { side: Side, reason: String },
    #[error("session {pairing} (repetition {repetition}) failed: {source}")]
    Session {
        pairing: String,
        repetition: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("statistics: {0}")]
    Statistics(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Serde(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
