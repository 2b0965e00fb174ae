use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid symbol {ch:?} at position {position}")]
    InvalidSymbol { ch: char, position: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("index range {i}..={j} is outside 1..={len}")]
    IndexOutOfRange { i: usize, j: usize, len: usize },
    #[error("transition {step} has zero probability under the model")]
    ZeroProbability { step: usize },
    #[error("unknown state {0}")]
    UnknownState(usize),
    #[error("malformed model: {0}")]
    Model(String),
    #[error("malformed snapshot line {line}: {reason}")]
    Snapshot { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
