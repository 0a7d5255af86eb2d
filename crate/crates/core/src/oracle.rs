//! Arbitrary-precision reference values for testing.
//!
//! Everything here is exact integer and rational arithmetic over binomial
//! coefficients. It deliberately does not use the term-ratio recurrence or
//! the log-factorial table, so it can check both. The `ln_*` helpers convert
//! results to log scale for comparisons and are the only floating point code
//! in this module.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::contingency::ContingencyTable;
use crate::error::{Error, Result};

/// Largest `n` accepted by the oracle.
pub const ORACLE_MAX_N: u64 = 20_000;

fn check_capacity(n: u64) -> Result<()> {
    if n > ORACLE_MAX_N {
        Err(Error::CapacityExceeded {
            requested: n,
            limit: ORACLE_MAX_N,
        })
    } else {
        Ok(())
    }
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for i in 0..k {
        c *= n - i;
        c /= i + 1;
    }
    c
}

/// Walks `C(n, k), C(n, k + 1), ...` with exact integer updates.
struct BinomialRow {
    n: u64,
    k: u64,
    value: BigUint,
}

impl BinomialRow {
    fn starting_at(n: u64, k: u64) -> Self {
        BinomialRow {
            n,
            k,
            value: binomial(n, k),
        }
    }

    fn advance(&mut self) {
        self.value *= self.n - self.k;
        self.value /= self.k + 1;
        self.k += 1;
    }
}

/// Exact one-sided p-value: the sum over `i = 0..=J` of
/// `C(m(X), m(XA)+i) C(m(¬X), m(¬X¬A)+i) / C(n, m(A))`.
///
/// The result is not reduced to lowest terms.
pub fn exact_fisher(t: &ContingencyTable) -> Result<BigRational> {
    check_capacity(t.n())?;
    let m_not_x = t.n() - t.m_x();
    let mut with_x = BinomialRow::starting_at(t.m_x(), t.m_xa());
    let mut without_x = BinomialRow::starting_at(m_not_x, t.m_not_x_not_a());
    let mut numerator = BigUint::zero();
    for i in 0..=t.j() {
        if i > 0 {
            with_x.advance();
            without_x.advance();
        }
        numerator += &with_x.value * &without_x.value;
    }
    let denominator = binomial(t.n(), t.m_a());
    Ok(BigRational::new_raw(numerator.into(), denominator.into()))
}

/// Point probabilities of every table with the margins of `t`, ordered by
/// increasing `m(XA)`.
pub fn point_probabilities(t: &ContingencyTable) -> Result<Vec<BigRational>> {
    check_capacity(t.n())?;
    let (n, mx, ma) = (t.n(), t.m_x(), t.m_a());
    let lo = (mx + ma).saturating_sub(n);
    let hi = mx.min(ma);
    let denominator: num_bigint::BigInt = binomial(n, ma).into();
    Ok((lo..=hi)
        .map(|k| {
            let num = binomial(mx, k) * binomial(n - mx, ma - k);
            BigRational::new_raw(num.into(), denominator.clone())
        })
        .collect())
}

/// Top 64 bits of `x` and the number of bits dropped.
fn split_top(x: &BigUint) -> (f64, u64) {
    let shift = x.bits().saturating_sub(64);
    let top = (x >> shift)
        .to_u64()
        .expect("64 significant bits fit in u64");
    (top as f64, shift)
}

pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (top, shift) = split_top(x);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln r` for a positive rational.
pub fn ln_rational(r: &BigRational) -> f64 {
    let (num, num_shift) = split_top(r.numer().magnitude());
    let (den, den_shift) = split_top(r.denom().magnitude());
    let shift = num_shift as f64 - den_shift as f64;
    (num / den).ln() + shift * std::f64::consts::LN_2
}
