use thiserror::Error;

/// Errors raised by the engine. Validation failures of a structure's
/// probabilities are reported as data (see `ValidationReport`), not here.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed structure: {0}")]
    Malformed(String),

    #[error("structure failed validation: {0}")]
    Invalid(String),

    #[error("unknown state index {0}")]
    UnknownState(usize),

    #[error("unknown agent index {0}")]
    UnknownAgent(usize),

    #[error("agents must differ (got {0} twice)")]
    SameAgent(usize),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("partitions are over different state sets ({0} vs {1} states)")]
    PartitionMismatch(usize, usize),

    #[error("horizon mismatch: expected t={expected}, got t={found}")]
    HorizonMismatch { expected: u32, found: u32 },

    #[error("count vector is impossible under every state")]
    InfeasibleCounts,

    #[error("capacity exceeded: {what} needs {needed}, budget is {budget}")]
    Capacity {
        what: String,
        needed: u128,
        budget: u128,
    },

    #[error("matrix is not row-stochastic: {0}")]
    NotStochastic(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("epsilon {epsilon} exceeds the admissible radius (gap b = {gap})")]
    GapNotPositive { epsilon: f64, gap: f64 },

    #[error("threshold search failed within t <= {cap}: {detail}")]
    ThresholdNotFound { cap: u32, detail: String },

    #[error("scenario parse error at {at}: {message}")]
    Parse { at: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for budget/horizon failures, which callers may retry with a
    /// different engine (Monte Carlo) or a larger budget.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. } | Error::ThresholdNotFound { .. })
    }
}
