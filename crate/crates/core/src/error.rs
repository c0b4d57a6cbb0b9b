use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A function was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numeric procedure failed (no bracket, no convergence, ...).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An exhaustive computation would exceed its configured work budget.
    #[error("work budget exceeded: {needed} evaluations needed, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    /// The requested variant is not catalogued.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A predicate that must be monotone was observed to flip back.
    #[error("non-monotone predicate: {0}")]
    NonMonotone(String),

    /// A precondition on a function table failed; carries a witness pair.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An internal invariant was broken (message outside alphabet, ...).
    #[error("internal error: {0}")]
    Internal(String),

    /// Malformed serialized input.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        param(format!("{name} = {p} is not in [0, 1]"))
    }
}
