use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected {expected} {what}, got {got}")]
    Arity {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{what} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("invalid distribution for {context}: {reason}")]
    InvalidDistribution { context: String, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("linear system for the policy value is singular")]
    SingularSystem,

    #[error("history enumeration would visit up to {bound} histories (limit {limit})")]
    EnumerationLimit { bound: f64, limit: f64 },

    #[error("finite-difference gradient unstable: {coarse} at step 1e-5 vs {fine} at step 1e-6")]
    GradientUnstable { coarse: f64, fine: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
