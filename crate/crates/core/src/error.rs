use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("exponent overflow: degree {degree} does not fit in 16 bits")]
    ExponentOverflow { degree: u64 },

    #[error("moment of degree {degree} requested but source depth is {depth}")]
    TableTooShallow { degree: u32, depth: u32 },

    #[error("denominator-side matrix is indefinite (pivot {pivot:e} relative to scale {scale:e})")]
    IndefiniteDenominator { pivot: f64, scale: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("size cap exceeded: {what} = {size} > {cap}")]
    SizeCap { what: &'static str, size: usize, cap: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
