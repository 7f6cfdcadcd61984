//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("buffer too short: {len} samples, need at least {min}")]
    BufferTooShort { len: usize, min: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular network: nodal system has no unique solution")]
    SingularSystem,

    #[error("simulation failed for config index {index}: {source}")]
    ConfigFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("training aborted at epoch {epoch}: non-finite loss {loss}")]
    NonFiniteLoss { epoch: usize, loss: f64 },

    #[error("all {0} search starts reached a non-finite error")]
    AllStartsDiverged(usize),

    #[error("malformed log line {line}: {msg}")]
    MalformedLog { line: usize, msg: String },

    #[error("unknown gate `{name}`; valid gates: {valid}")]
    UnknownGate { name: String, valid: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
