use std::cmp::Ordering;
use std::fmt;

/// A probability kept in log space with its linear view.
///
/// `log_value` is the authoritative comparison key: `linear_value` becomes
/// 0.0 once the probability underflows, while `log_value` stays finite.
/// Upper bounds can exceed 1; those are clamped to 1 with `clamped` set, and
/// the unclamped log value is kept in `raw_log_value` for ranking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValue {
    log_value: f64,
    raw_log_value: f64,
    linear_value: f64,
    clamped: bool,
    terms_evaluated: u64,
}

impl PValue {
    pub fn from_log(raw_log_value: f64, terms_evaluated: u64) -> Self {
        let clamped = raw_log_value > 0.0;
        let log_value = if clamped { 0.0 } else { raw_log_value };
        PValue {
            log_value,
            raw_log_value,
            linear_value: log_value.exp(),
            clamped,
            terms_evaluated,
        }
    }

    pub fn log_value(&self) -> f64 {
        self.log_value
    }

    pub fn raw_log_value(&self) -> f64 {
        self.raw_log_value
    }

    pub fn linear_value(&self) -> f64 {
        self.linear_value
    }

    /// Unclamped linear value, possibly above 1.
    pub fn raw_linear_value(&self) -> f64 {
        self.raw_log_value.exp()
    }

    pub fn clamped(&self) -> bool {
        self.clamped
    }

    /// Number of hypergeometric terms materialised to produce this value.
    pub fn terms_evaluated(&self) -> u64 {
        self.terms_evaluated
    }

    /// Total order on the unclamped log value.
    pub fn rank_cmp(&self, other: &PValue) -> Ordering {
        self.raw_log_value.total_cmp(&other.raw_log_value)
    }
}

impl fmt::Display for PValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.linear_value > 0.0 {
            write!(f, "{:e}", self.linear_value)
        } else {
            write!(f, "exp({})", self.log_value)
        }
    }
}
