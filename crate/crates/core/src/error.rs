use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A cell count falls outside the bounds implied by the margins.
    #[error("margin violation: {0}")]
    MarginViolation(String),

    /// `m(X)` or `m(A)` equals 0 or `n`.
    #[error("degenerate margin: {0}")]
    DegenerateMargin(String),

    #[error("capacity exceeded: requested {requested}, limit {limit}")]
    CapacityExceeded { requested: u64, limit: u64 },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    /// The table does not show a positive dependency (leverage <= 0).
    #[error("no positive dependency (leverage <= 0); test X -> not A instead")]
    NegativeDependency,

    #[error("bound not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid exact-term count k = {0}; k must be >= 1")]
    InvalidK(u64),

    #[error("internal numeric error: {0}")]
    Internal(String),
}

impl Error {
    /// Stable upper-case reason code, used in batch reject files.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MarginViolation(_) => "MARGIN_VIOLATION",
            Error::DegenerateMargin(_) => "DEGENERATE_MARGIN",
            Error::CapacityExceeded { .. } => "CAPACITY_EXCEEDED",
            Error::OutOfRange(_) => "OUT_OF_RANGE",
            Error::NegativeDependency => "NEGATIVE_DEPENDENCY",
            Error::NotApplicable(_) => "NOT_APPLICABLE",
            Error::InvalidK(_) => "INVALID_K",
            Error::Internal(_) => "INTERNAL",
        }
    }
}
