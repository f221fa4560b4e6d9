use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition of an operation was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("illegal action: {0}")]
    IllegalAction(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid tile set: {0}")]
    TileSet(String),
    #[error("replay diverged at line {line}: {reason}")]
    Replay { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
