use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("malformed map: {0}")]
    Malformed(String),
    #[error("search budget of {0} nodes exceeded")]
    Budget(u64),
    #[error("euler genus exceeds the configured maximum {0}")]
    GenusTooLarge(usize),
    #[error("oracle budget exhausted: {0}")]
    OracleBudget(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
