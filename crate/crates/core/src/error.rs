use thiserror::Error;

/// Errors raised by the matrix kernel, system constructors and norm programs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e} exceeds {tolerance:.3e})")]
    Symmetry { asymmetry: f64, tolerance: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid system `{label}`: {invariant}")]
    InvalidSystem { label: String, invariant: String },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("solver did not reach a verdict: {0}")]
    Indeterminate(String),

    #[error("unknown suite `{name}`; valid suites: {valid}")]
    UnknownSuite { name: String, valid: String },
}

pub type Result<T> = std::result::Result<T, Error>;
