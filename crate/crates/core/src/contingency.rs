//! Validated 2x2 contingency tables for a rule `X -> A` and the descriptive
//! statistics derived from them.
//!
//! Cells are named after the events they count:
//!
//! |        | A          | not A        |
//! |--------|------------|--------------|
//! | X      | `m_xa`     | `m_x_not_a`  |
//! | not X  | `m_not_x_a`| `m_not_x_not_a` |

use std::fmt;

use crate::error::{Error, Result};

/// Counts `n`, `m(X)`, `m(A)`, `m(XA)` with both margins non-degenerate.
///
/// Construction goes through [`ContingencyTable::new`], so every value of this
/// type satisfies `0 < m(X) < n`, `0 < m(A) < n` and
/// `max(0, m(X) + m(A) - n) <= m(XA) <= min(m(X), m(A))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ContingencyTable {
    n: u64,
    m_x: u64,
    m_a: u64,
    m_xa: u64,
}

impl ContingencyTable {
    pub fn new(n: u64, m_x: u64, m_a: u64, m_xa: u64) -> Result<Self> {
        if m_x > n || m_a > n {
            return Err(Error::MarginViolation(format!(
                "margins m(X)={m_x}, m(A)={m_a} exceed n={n}"
            )));
        }
        if m_x == 0 || m_x == n {
            return Err(Error::DegenerateMargin(format!("m(X)={m_x} with n={n}")));
        }
        if m_a == 0 || m_a == n {
            return Err(Error::DegenerateMargin(format!("m(A)={m_a} with n={n}")));
        }
        let upper = m_x.min(m_a);
        let lower = (m_x + m_a).saturating_sub(n);
        if m_xa > upper || m_xa < lower {
            return Err(Error::MarginViolation(format!(
                "m(XA)={m_xa} outside [{lower}, {upper}]"
            )));
        }
        Ok(ContingencyTable { n, m_x, m_a, m_xa })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m_x(&self) -> u64 {
        self.m_x
    }

    pub fn m_a(&self) -> u64 {
        self.m_a
    }

    pub fn m_xa(&self) -> u64 {
        self.m_xa
    }

    pub fn m_x_not_a(&self) -> u64 {
        self.m_x - self.m_xa
    }

    pub fn m_not_x_a(&self) -> u64 {
        self.m_a - self.m_xa
    }

    pub fn m_not_x_not_a(&self) -> u64 {
        self.n + self.m_xa - self.m_x - self.m_a
    }

    /// Cells in row-major order: `[m(XA), m(X¬A), m(¬XA), m(¬X¬A)]`.
    pub fn cells(&self) -> [u64; 4] {
        [
            self.m_xa,
            self.m_x_not_a(),
            self.m_not_x_a(),
            self.m_not_x_not_a(),
        ]
    }

    /// Number of tables more extreme than the observed one:
    /// `min(m(X¬A), m(¬XA))`.
    pub fn j(&self) -> u64 {
        self.m_x_not_a().min(self.m_not_x_a())
    }

    /// `m(XA) m(¬X¬A) - m(X¬A) m(¬XA)`, which equals `n² δ` exactly.
    pub fn determinant(&self) -> i128 {
        let [a, b, c, d] = self.cells().map(i128::from);
        a * d - b * c
    }

    /// True when the leverage is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.determinant() > 0
    }

    /// The table for the rule `X -> ¬A`.
    pub fn negate_consequent(&self) -> Self {
        let negated =
            ContingencyTable::new(self.n, self.m_x, self.n - self.m_a, self.m_x - self.m_xa);
        debug_assert!(negated.is_ok(), "complement of a valid table is valid");
        negated.expect("complement of a valid table is valid")
    }

    /// The table with the roles of `X` and `A` exchanged.
    pub fn transpose(&self) -> Self {
        ContingencyTable {
            m_x: self.m_a,
            m_a: self.m_x,
            ..*self
        }
    }

    pub fn stats(&self) -> DerivedStats {
        DerivedStats::from_table(self)
    }
}

impl fmt::Display for ContingencyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} m(X)={} m(A)={} m(XA)={}",
            self.n, self.m_x, self.m_a, self.m_xa
        )
    }
}

/// Frequencies, dependency measures and expected counts of a table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedStats {
    /// `P(X)`
    pub x: f64,
    /// `P(A)`
    pub a: f64,
    pub lift: f64,
    pub leverage: f64,
    /// `+inf` when `m(X¬A) m(¬XA) = 0`.
    pub odds_ratio: f64,
    pub odds_ratio_infinite: bool,
    pub j: u64,
    /// Expected counts under independence, in the cell order of
    /// [`ContingencyTable::cells`].
    pub expected: [f64; 4],
}

impl DerivedStats {
    pub fn from_table(t: &ContingencyTable) -> Self {
        let n = t.n() as f64;
        let (m_x, m_a) = (t.m_x() as f64, t.m_a() as f64);
        let [a, b, c, d] = t.cells();
        let off_diagonal = u128::from(b) * u128::from(c);
        let diagonal = u128::from(a) * u128::from(d);
        let odds_ratio_infinite = off_diagonal == 0;
        let odds_ratio = if odds_ratio_infinite {
            f64::INFINITY
        } else {
            diagonal as f64 / off_diagonal as f64
        };
        let (m_not_x, m_not_a) = (n - m_x, n - m_a);
        DerivedStats {
            x: m_x / n,
            a: m_a / n,
            lift: (u128::from(t.n()) * u128::from(a)) as f64
                / (u128::from(t.m_x()) * u128::from(t.m_a())) as f64,
            leverage: t.determinant() as f64 / (n * n),
            odds_ratio,
            odds_ratio_infinite,
            j: t.j(),
            expected: [
                m_x * m_a / n,
                m_x * m_not_a / n,
                m_not_x * m_a / n,
                m_not_x * m_not_a / n,
            ],
        }
    }

    pub fn min_expected(&self) -> f64 {
        self.expected.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
