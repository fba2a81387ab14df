use std::io;

use thiserror::Error;

use crate::matroid::ElementId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("element {id} is not in the ground set (size {n})")]
    UnknownElement { id: ElementId, n: usize },

    #[error("element {0} appears more than once in a query set")]
    DuplicateElement(ElementId),

    #[error("query touches element {0}, which is outside the minor's ground set")]
    OutsideMinor(ElementId),

    #[error("oracle query touches unrevealed element {0}")]
    AuditViolation(ElementId),

    #[error("weight {weight} lies outside the promised range ({low}, {high}]")]
    OutOfPromise { weight: f64, low: f64, high: f64 },

    #[error("enumeration budget exceeded: {what} is {actual}, limit {limit}")]
    BudgetExceeded {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("invalid matroid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid bucketing: {0}")]
    InvalidBucketing(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("trial {trial} selected a dependent set")]
    InfeasibleSelection { trial: u64 },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no elements")]
    NoElements,

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
