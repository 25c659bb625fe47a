use thiserror::Error;

/// Errors raised by the exact-arithmetic and pipeline layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("elements belong to different orders")]
    OrderMismatch,
    #[error("element has a nonzero omega part in a rational order")]
    NotInOrder,
    #[error("not divisible in the order")]
    NotDivisible,
    #[error("division by zero")]
    DivisionByZero,
    #[error("matrix is not square")]
    NotSquare,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("malformed minor index: {0}")]
    MalformedIndex(String),
    #[error("determinant is zero: not an isogeny")]
    NotAnIsogeny,
    #[error("matrix does not have full row rank")]
    RankDeficient,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("no admissible lambda within bound {0}")]
    BoundTooSmall(String),
    #[error("minor vanished for index {0}")]
    MinorVanished(String),
    #[error("enumeration needs {needed} points, budget is {budget}")]
    EnumerationBudget { needed: u128, budget: u128 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("missing stabilizer cardinality for a formula that requires it")]
    MissingStabilizer,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
