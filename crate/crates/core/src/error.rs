use thiserror::Error;

/// Errors raised by the algebraic layers and the analyzer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MwpError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("not a flow symbol: `{0}`")]
    BadScalar(String),

    #[error("assignment has {got} choices, registry has {expected}")]
    AssignmentLength { expected: usize, got: usize },

    #[error("choice {index} has value {value}, domain size is {cardinality}")]
    AssignmentRange {
        index: usize,
        value: u32,
        cardinality: u32,
    },

    #[error("assignment does not cover choice index {0}")]
    MissingIndex(usize),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("call to unknown function `{0}`")]
    UnknownFunction(String),

    #[error("function `{callee}` takes {expected} arguments, got {got}")]
    Arity {
        callee: String,
        expected: usize,
        got: usize,
    },

    #[error("no function named `{0}`")]
    NoSuchFunction(String),

    #[error("enumeration of {needed} assignments exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("`{caller}` contains no call to `{callee}`")]
    NoCallSite { caller: String, callee: String },

    #[error("internal error: {0}")]
    Internal(String),
}
