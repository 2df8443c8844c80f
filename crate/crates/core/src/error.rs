use thiserror::Error;

/// Errors produced by tower construction, arithmetic and order certification.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(String),

    #[error("invalid tower specification: {0}")]
    InvalidSpec(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("level mismatch: {0}")]
    LevelMismatch(String),

    #[error("operation requires {expected}, got {found}")]
    Unsupported { expected: &'static str, found: String },

    #[error("norm depth {j} exceeds level {level}")]
    NormTooDeep { j: usize, level: usize },

    #[error("zero element where a unit is required")]
    ZeroElement,

    #[error("{p} does not divide the multiplicative group order")]
    ExponentNotDividing { p: u64 },

    #[error("initial polynomial is reducible: {0}")]
    ReducibleInitial(String),

    #[error("certificate failed: {0}")]
    CertificateFailed(String),

    #[error("no discriminant recurrence g is known for this tower")]
    MissingRecurrence,

    #[error("level {level} exceeds the evaluation cap {cap}")]
    CapExceeded { level: usize, cap: usize },

    #[error("level {0} has not been built")]
    LevelNotBuilt(usize),

    #[error("seed search failed: {0}")]
    SearchFailed(String),

    #[error("inconsistent factor hint: {0}")]
    BadHint(String),

    #[error("factorization budget exceeded, unfactored cofactor {0}")]
    BudgetExceeded(String),

    #[error("group order does not match the element's level: {0}")]
    GroupMismatch(String),

    #[error("field too large for exhaustive enumeration ({0} elements)")]
    FieldTooLarge(String),

    #[error("oracle mismatch in {operation}: {detail}")]
    OracleMismatch { operation: String, detail: String },

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
