use thiserror::Error;

/// Errors produced by the group, transform and moment engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    #[error("expected a {expected} vector, found a {found} vector")]
    SideMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("resource guard exceeded: {what} needs {needed}, bound is {bound}")]
    Resource {
        what: &'static str,
        needed: u128,
        bound: u128,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
