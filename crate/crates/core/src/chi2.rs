//! One-sided χ² baseline for 2x2 tables.

use crate::contingency::ContingencyTable;

/// Smallest expected count at which the χ² approximation is considered usable.
pub const MIN_EXPECTED_COUNT: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chi2Result {
    pub statistic: f64,
    /// Upper normal tail at `z = sign(δ) √χ²`.
    pub p_one_sided: f64,
    /// `ln p_one_sided`, finite even when the linear value underflows.
    pub log_p_one_sided: f64,
    pub min_expected: f64,
    pub rule_of_thumb_ok: bool,
}

/// `Q(z) = 1 - Φ(z)`.
pub fn normal_upper_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// `ln Q(z)`, switching to the asymptotic expansion once `Q` underflows.
pub fn log_normal_upper_tail(z: f64) -> f64 {
    let q = normal_upper_tail(z);
    if q > 1e-300 {
        return q.ln();
    }
    let r = 1.0 / (z * z);
    let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
    -0.5 * z * z - z.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + series.ln()
}

/// Uncorrected χ² statistic `n δ² / (x a (1-x)(1-a))` and its one-sided
/// p-value in the direction of the observed dependency.
pub fn chi2_one_sided(table: &ContingencyTable) -> Chi2Result {
    let n = table.n() as f64;
    let det = table.determinant() as f64;
    let margins = table.m_x() as f64
        * table.m_a() as f64
        * (table.n() - table.m_x()) as f64
        * (table.n() - table.m_a()) as f64;
    // n δ² / (x a (1-x)(1-a)) = n (ad - bc)² / (m(X) m(A) m(¬X) m(¬A))
    let statistic = n * (det / margins.sqrt()).powi(2);
    let z = det.signum() * statistic.sqrt();
    let min_expected = table.stats().min_expected();
    Chi2Result {
        statistic,
        p_one_sided: normal_upper_tail(z),
        log_p_one_sided: log_normal_upper_tail(z),
        min_expected,
        rule_of_thumb_ok: min_expected >= MIN_EXPECTED_COUNT,
    }
}
