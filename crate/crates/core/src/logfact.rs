//! Tabulated `ln(i!)` for constant-time log-binomials.

use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

/// Largest `max_n` a table may be built for unless a caller passes its own
/// budget (16 bytes per entry, so about 1 GiB).
pub const DEFAULT_MAX_N: u64 = 1 << 26;

/// `ln(i!)` for `i = 0..=max_n`.
///
/// Entries are accumulated and stored in double-double precision: `values`
/// holds the rounded running sum of `ln(i)` and `lows` the remainder. Log
/// binomials combine both words, so they stay accurate to about 1e-15
/// absolute even where `ln(n!)` itself is in the millions. Growing a table
/// continues the same accumulation, so a table grown in steps is
/// bit-identical to one built in a single pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LogFactorialTable {
    values: Vec<f64>,
    lows: Vec<f64>,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl LogFactorialTable {
    pub fn build(max_n: u64) -> Result<Self> {
        Self::build_with_budget(max_n, DEFAULT_MAX_N)
    }

    pub fn build_with_budget(max_n: u64, budget: u64) -> Result<Self> {
        LogFactorialTable::empty().extended_with_budget(max_n, budget)
    }

    fn empty() -> Self {
        LogFactorialTable {
            values: vec![0.0],
            lows: vec![0.0],
        }
    }

    pub fn max_n(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `ln(i!)`, or `None` past the end of the table.
    pub fn get(&self, i: u64) -> Option<f64> {
        self.values.get(usize::try_from(i).ok()?).copied()
    }

    pub fn extended(&self, max_n: u64) -> Result<Self> {
        self.extended_with_budget(max_n, DEFAULT_MAX_N)
    }

    fn extended_with_budget(&self, max_n: u64, budget: u64) -> Result<Self> {
        if max_n > budget || usize::try_from(max_n).is_err() {
            return Err(Error::CapacityExceeded {
                requested: max_n,
                limit: budget,
            });
        }
        if max_n <= self.max_n() {
            return Ok(self.clone());
        }
        let mut values = Vec::with_capacity(max_n as usize + 1);
        let mut lows = Vec::with_capacity(max_n as usize + 1);
        values.extend_from_slice(&self.values);
        lows.extend_from_slice(&self.lows);
        let mut hi = *values.last().expect("table is never empty");
        let mut lo = *lows.last().expect("table is never empty");
        for i in (self.max_n() + 1)..=max_n {
            let (s, err) = two_sum(hi, (i as f64).ln());
            let low = lo + err;
            hi = s + low;
            lo = low - (hi - s);
            values.push(hi);
            lows.push(lo);
        }
        Ok(LogFactorialTable { values, lows })
    }

    /// `ln C(n, k)`.
    ///
    /// Symmetric in `k` and `n - k` bit for bit.
    pub fn log_binomial(&self, n: u64, k: u64) -> Result<f64> {
        if k > n {
            return Err(Error::OutOfRange(format!("k={k} > n={n}")));
        }
        let ln_n = self.get(n).ok_or_else(|| {
            Error::OutOfRange(format!("n={n} beyond table size {}", self.max_n()))
        })?;
        let (n, k, r) = (n as usize, k as usize, (n - k) as usize);
        // hi_n - (hi_k + hi_r) with both rounding errors carried into the low word
        let (sum, sum_err) = two_sum(self.values[k], self.values[r]);
        let (diff, diff_err) = two_sum(ln_n, -sum);
        let low = self.lows[n] - (self.lows[k] + self.lows[r]);
        Ok(diff + ((diff_err - sum_err) + low))
    }
}

/// Shared, lazily grown log-factorial table.
///
/// Readers receive immutable snapshots; growth replaces the shared snapshot
/// with a larger one (at least doubling), so a snapshot never changes after
/// it has been handed out.
#[derive(Debug)]
pub struct LogFactorialCache {
    current: RwLock<Arc<LogFactorialTable>>,
    budget: u64,
}

impl Default for LogFactorialCache {
    fn default() -> Self {
        Self::with_budget(DEFAULT_MAX_N)
    }
}

impl LogFactorialCache {
    pub fn with_budget(budget: u64) -> Self {
        LogFactorialCache {
            current: RwLock::new(Arc::new(LogFactorialTable::empty())),
            budget,
        }
    }

    /// Process-wide cache with the default budget.
    pub fn global() -> &'static LogFactorialCache {
        static GLOBAL: OnceLock<LogFactorialCache> = OnceLock::new();
        GLOBAL.get_or_init(LogFactorialCache::default)
    }

    /// A snapshot covering at least `0..=max_n`.
    pub fn snapshot(&self, max_n: u64) -> Result<Arc<LogFactorialTable>> {
        {
            let current = self.current.read().expect("log-factorial lock poisoned");
            if current.max_n() >= max_n {
                return Ok(Arc::clone(&current));
            }
        }
        if max_n > self.budget {
            return Err(Error::CapacityExceeded {
                requested: max_n,
                limit: self.budget,
            });
        }
        let mut current = self.current.write().expect("log-factorial lock poisoned");
        if current.max_n() < max_n {
            let target = max_n
                .max(current.max_n().saturating_mul(2))
                .min(self.budget);
            *current = Arc::new(current.extended_with_budget(target, self.budget)?);
        }
        Ok(Arc::clone(&current))
    }
}
