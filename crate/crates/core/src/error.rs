use thiserror::Error;

/// Errors raised by the arithmetic and verification layers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid prime pair ({p}, {q}): {reason}")]
    InvalidPair { p: u64, q: u64, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("radicand {d} is not square-free or is at most 1")]
    BadRadicand { d: u64 },

    #[error("radicands differ: {left} vs {right}")]
    RadicandMismatch { left: u64, right: u64 },

    #[error("elements belong to different fields: {left} vs {right}")]
    PairMismatch { left: String, right: String },

    #[error("radicand {d} is not the radicand of a quadratic subfield of {field}")]
    NotASubfield { d: u64, field: String },

    #[error("division by zero")]
    DivisionByZero,

    #[error("square root of {word} does not exist in the field")]
    RootMissing { word: String },

    #[error("precision exhausted at {bits} bits")]
    PrecisionExhausted { bits: u64 },

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
