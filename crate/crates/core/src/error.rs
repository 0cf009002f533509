use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Caller passed mismatched or out-of-range arguments.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("division by zero in GF({q})")]
    DivisionByZero { q: u32 },

    /// A field is too small for the requested coding operation.
    #[error("field GF({q}) too small: need at least {required} elements")]
    FieldTooSmall { q: u32, required: usize },

    /// No vector of the source subspace avoids every obstacle.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("underdetermined system: rank {rank} < {n}")]
    Underdetermined { rank: usize, n: usize },

    #[error("inconsistent system: received payloads contradict each other")]
    Inconsistent,

    /// An exhaustive computation would exceed its configured size.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The exact search ran out of budget; the optimum lies in `[lower, upper]`.
    #[error("search budget of {budget} nodes exhausted; optimum lies in [{lower}, {upper}]")]
    BudgetExceeded {
        budget: u64,
        lower: usize,
        upper: usize,
    },

    /// A result broke an ordering that must hold on every instance.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}
