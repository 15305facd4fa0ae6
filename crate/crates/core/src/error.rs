use thiserror::Error;

use crate::oracle::OracleError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain bit-length {0} outside 1..=30")]
    Domain(u32),
    #[error("parameter error: {0}")]
    Param(String),
    #[error("oracle error: {0}")]
    Oracle(#[from] OracleError),
    #[error("malformed Sam query: {0}")]
    MalformedQuery(String),
    #[error("input length mismatch: expected {expected}, got {got}")]
    InputLength { expected: u32, got: u32 },
    #[error("schedule violation: {0}")]
    Schedule(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("decode failure: {0}")]
    Decode(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal invariant broken: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
