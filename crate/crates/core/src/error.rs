use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("arithmetic overflow")]
    Overflow,

    #[error("tropical division by -inf")]
    DivisionByNegInf,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix side {side} exceeds enumeration cap {cap}")]
    SizeExceeded { side: usize, cap: usize },

    #[error("{which} row {row} has no finite entry")]
    EmptyRow { which: &'static str, row: usize },

    #[error("objective undefined: {0}")]
    UndefinedObjective(String),

    #[error("vector has no finite entry")]
    AllNegInf,

    #[error("degree imbalance: sum(muPlus) = {plus}, sum(muMinus) = {minus}")]
    Unbalanced { plus: u64, minus: u64 },

    #[error("tree is inconsistent with the instance: {0}")]
    InconsistentTree(String),

    #[error("tangent digraph is not a spanning tree")]
    NotATree,

    #[error("2^{exponent} is out of range for this numeric mode; use mode \"rat\"")]
    ExponentOverflow { exponent: u32 },

    #[error("enumeration cap {0} exceeded")]
    CapExceeded(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("malformed instance: {0}")]
    Parse(String),

    #[error("{0}")]
    Internal(String),
}
