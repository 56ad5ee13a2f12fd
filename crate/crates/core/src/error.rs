use thiserror::Error;

/// Errors produced by scheme construction, encoding, decoding and the verifiers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdocsError {
    #[error("non-finite input value {0}")]
    NonFinite(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("sizing infeasible: column weight {weight} exceeds row count {rows}")]
    Infeasible { weight: usize, rows: usize },

    #[error("enumeration of {required} subsets exceeds budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("design verification failed after {attempts} attempts: {property}")]
    VerificationFailed { attempts: usize, property: String },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, EdocsError>;

pub(crate) fn invalid(msg: impl Into<String>) -> EdocsError {
    EdocsError::InvalidParameter(msg.into())
}
