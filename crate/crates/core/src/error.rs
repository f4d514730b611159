use thiserror::Error;

/// Errors raised by the bound evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The function values at the bracket endpoints do not straddle the level.
    #[error("no bracket: f({lo}) = {f_lo}, f({hi}) = {f_hi}, level {level}")]
    NoBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
        level: f64,
    },

    /// Two objects that must share an alphabet or shape do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A mass vector is not a probability distribution.
    #[error("row {row}: {defect}")]
    InvalidDistribution { row: usize, defect: String },

    /// The requested (ε, δ) pair lies in a regime where the bound does not apply.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// An exhaustive enumeration would exceed its size guard.
    #[error("instance too large: {0}")]
    TooLarge(String),

    /// An inner solver failed to converge or reported an inconsistent state.
    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
