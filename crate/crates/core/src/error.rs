use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("multiplication table is not associative")]
    NonAssociativeTable,
    #[error("multiplication table is not a Latin square")]
    NotLatinSquare,
    #[error("element 0 is not a two-sided identity")]
    BadIdentity,
    #[error("empty generator set")]
    EmptyGenerators,
    #[error("group order {order} exceeds the configured cap {cap}")]
    OrderCapExceeded { order: usize, cap: usize },
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("not a subgroup of the expected group")]
    NotSubgroup,
    #[error("operands belong to different groups")]
    GroupMismatch,
    #[error("operands use different fiber groups")]
    FiberMismatch,
    #[error("division by zero cyclotomic")]
    DivisionByZero,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("enumeration cap exceeded: {0}")]
    EnumerationCap(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
