use thiserror::Error;

/// Errors surfaced by channel, allocation, rate, oracle and optimizer code.
#[derive(Debug, Error)]
pub enum Error {
    /// The network description itself is inconsistent (coincident nodes,
    /// non-positive noise, mismatched list lengths, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller violated an API precondition (index out of range, i = t, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// A power split breaks one or more allocation invariants.
    #[error("invalid power split: {0}")]
    Validation(String),

    /// A linear-algebra step lost positive definiteness or hit a tiny pivot.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// An exhaustive search would exceed the configured evaluation budget.
    #[error("evaluation budget exceeded: {required} evaluations required, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    /// The request is structurally valid but outside supported problem sizes.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
