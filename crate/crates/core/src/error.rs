use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates an operation's contract.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Vector/matrix shapes do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A combinatorial enumeration would exceed its configured budget.
    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),

    /// A numerical routine failed to converge or hit a degenerate state.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
