use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("not a polynomial in y: odd q-exponent {0}")]
    NotYPolynomial(i64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("fraction does not reduce to a Laurent polynomial")]
    NotLaurent,
    #[error("invalid degree: {0}")]
    InvalidDegree(String),
    #[error("invalid combinatorial type: {0}")]
    InvalidType(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("not orientable: {0}")]
    NotOrientable(String),
    #[error("exact arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("retry budget exhausted: {0}")]
    RetriesExhausted(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
