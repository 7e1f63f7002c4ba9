use thiserror::Error;

/// Errors raised by the library. Verification failures are not errors;
/// they come back as reports with `passed == false`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("degree must be positive")]
    ZeroDegree,
    #[error("field of order {0} is too large for table-backed arithmetic")]
    FieldTooLarge(u128),
    #[error("vector of {dim} coordinates over GF({q}) does not fit in a 64-bit row")]
    RowTooWide { q: u32, dim: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {value} is not an element of GF({q})")]
    BadCoordinate { value: u32, q: u32 },
    #[error("basis is not in reduced row-echelon form")]
    NotCanonical,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("subspace outside the classified orbit atlas: class ({i},{j})")]
    Unclassified { i: usize, j: usize },
    #[error("budget of {budget} exceeded ({needed} required)")]
    BudgetExceeded { budget: u64, needed: u128 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("malformed design file: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
