use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("format error on line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("degenerate kernel: K({index},{index}) + u = 0 with a nonzero column")]
    DegenerateKernel { index: usize },

    #[error("angle undefined for a zero weight vector")]
    UndefinedAngle,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
