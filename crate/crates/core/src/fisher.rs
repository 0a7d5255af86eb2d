//! Exact one-sided Fisher p-value by the term-ratio recurrence.
//!
//! For a positive dependency `X -> A` the p-value sums the point
//! probabilities of the observed table and of the `J` tables obtained by
//! moving one count at a time from the off-diagonal into the diagonal:
//!
//! ```text
//! p_F = p_0 (1 + q_1 + q_1 q_2 + ... + q_1 ... q_J)
//! q_i = (m(X¬A) - i + 1)(m(¬XA) - i + 1) / ((m(XA) + i)(m(¬X¬A) + i))
//! ```
//!
//! Only `p_0` needs factorials. The sum runs in linear space relative to
//! `p_0` and is moved to log space once at the end.

use crate::contingency::ContingencyTable;
use crate::error::{Error, Result};
use crate::logfact::LogFactorialTable;
use crate::pvalue::PValue;

/// `q_i` as an exact ratio of integer products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermRatio {
    pub num: u128,
    pub den: u128,
}

impl TermRatio {
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `1 - q`, from the exact integer difference. `None` unless `q < 1`.
    pub fn one_minus(&self) -> Option<f64> {
        (self.num < self.den).then(|| (self.den - self.num) as f64 / self.den as f64)
    }

    /// `ln q`, accurate also for `q` close to 1. `None` unless `0 < q < 1`.
    pub fn ln(&self) -> Option<f64> {
        if self.num == 0 {
            return None;
        }
        let q = self.value();
        if q < 0.5 {
            Some(q.ln())
        } else {
            self.one_minus().map(|d| (-d).ln_1p())
        }
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn new(start: f64) -> Self {
        CompensatedSum {
            sum: start,
            compensation: 0.0,
        }
    }

    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// The constant part of the p-value sum for one table: `ln p_0`,
/// `ln p_abs`, `J`, and a generator for the ratios `q_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermEngine {
    table: ContingencyTable,
    log_p0: f64,
    log_p_abs: f64,
    j: u64,
}

impl TermEngine {
    pub fn new(table: &ContingencyTable, factorials: &LogFactorialTable) -> Result<Self> {
        let n = table.n();
        let log_p0 = factorials.log_binomial(table.m_x(), table.m_xa())?
            + factorials.log_binomial(n - table.m_x(), table.m_not_x_not_a())?
            - factorials.log_binomial(n, table.m_a())?;
        let lf = |i: u64| factorials.values()[i as usize];
        let log_p_abs = lf(table.m_a()) + lf(n - table.m_a()) - lf(n);
        Ok(TermEngine {
            table: *table,
            log_p0,
            log_p_abs,
            j: table.j(),
        })
    }

    pub fn table(&self) -> &ContingencyTable {
        &self.table
    }

    /// `ln p_0`, the log point probability of the observed table.
    pub fn log_p0(&self) -> f64 {
        self.log_p0
    }

    /// `ln(m(A)! m(¬A)! / n!)`, the factor shared by every term.
    pub fn log_p_abs(&self) -> f64 {
        self.log_p_abs
    }

    pub fn j(&self) -> u64 {
        self.j
    }

    pub fn is_positive(&self) -> bool {
        self.table.is_positive()
    }

    /// `q_i` for `1 <= i <= J + 1`; `q_{J+1}` is 0.
    pub fn q(&self, i: u64) -> TermRatio {
        assert!(
            i >= 1 && i <= self.j + 1,
            "q_{i} outside 1..={}",
            self.j + 1
        );
        let [a, b, c, d] = self.table.cells().map(u128::from);
        let i = u128::from(i);
        TermRatio {
            num: (b + 1 - i) * (c + 1 - i),
            den: (a + i) * (d + i),
        }
    }

    /// `q_1, ..., q_J` as floats.
    pub fn ratios(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.j).map(|i| self.q(i).value())
    }

    /// `p_i / p_0` for `i = 0, 1, ..., J`.
    pub fn relative_terms(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(1.0).chain(self.ratios().scan(1.0, |prod, q| {
            *prod *= q;
            Some(*prod)
        }))
    }

    pub(crate) fn require_positive(&self) -> Result<()> {
        if self.is_positive() {
            Ok(())
        } else {
            Err(Error::NegativeDependency)
        }
    }
}

/// Exact one-sided p-value. Evaluates all `J + 1` terms.
pub fn exact_fisher(engine: &TermEngine) -> Result<PValue> {
    engine.require_positive()?;
    let mut sum = CompensatedSum::new(1.0);
    for t in engine.relative_terms().skip(1) {
        sum.add(t);
    }
    Ok(PValue::from_log(
        engine.log_p0() + sum.value().ln(),
        engine.j() + 1,
    ))
}
