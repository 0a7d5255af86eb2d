//! Constant-time upper bounds on the exact p-value and their error bounds.
//!
//! All bounds share the structure "sum the leading terms exactly, bound the
//! rest by a geometric series in the largest remaining ratio":
//!
//! * [`ub1`]: `p_0 (1 + P(X¬A) P(¬XA) / δ)`, only `p_0` exact.
//! * [`ub2`]: `p_0 (1 - q_1^(J+1)) / (1 - q_1)`.
//! * [`ub_k`]: `p_0 + ... + p_(k-2) + p_(k-1) (1 - q_k^(J-k+2)) / (1 - q_k)`.
//!
//! `k` counts the terms `p_0 .. p_(k-1)` that are formed explicitly, so
//! `ub_k(1)` is `ub2` and the customary "ub3" is `ub_k(3)`.

use crate::chi2::{chi2_one_sided, Chi2Result};
use crate::contingency::{ContingencyTable, DerivedStats};
use crate::error::{Error, Result};
use crate::fisher::{exact_fisher, CompensatedSum, TermEngine, TermRatio};
use crate::logfact::LogFactorialTable;
use crate::pvalue::PValue;

/// `(1 + √5) / 2`
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

/// Lift from which `ub1 - p_F <= p_0` is guaranteed.
pub const UB1_GUARANTEE_LIFT: f64 = 2.0;

/// `ub1 / p_0`, computed as `m(XA) m(¬X¬A) / (m(XA) m(¬X¬A) - m(X¬A) m(¬XA))`.
pub fn ub1_multiplier(table: &ContingencyTable) -> Result<f64> {
    let det = table.determinant();
    if det <= 0 {
        return Err(Error::NotApplicable(
            "ub1 needs leverage > 0 (lift > 1)".to_string(),
        ));
    }
    let [a, _, _, d] = table.cells().map(u128::from);
    Ok((a * d) as f64 / det as f64)
}

/// `ub1 / p_0` written in terms of the lift:
/// `1 + (1 - aγ - xγ + xaγ²) / (γ - 1)`.
pub fn ub1_multiplier_from_lift(stats: &DerivedStats) -> f64 {
    let (x, a, g) = (stats.x, stats.a, stats.lift);
    1.0 + (1.0 - a * g - x * g + x * a * g * g) / (g - 1.0)
}

pub fn ub1(engine: &TermEngine) -> Result<PValue> {
    let multiplier = ub1_multiplier(engine.table())?;
    Ok(PValue::from_log(engine.log_p0() + multiplier.ln(), 1))
}

/// `1 + q + ... + q^(terms-1)` for `0 <= q < 1`.
fn geometric_sum(q: TermRatio, terms: u64) -> Result<f64> {
    if terms == 0 {
        return Ok(0.0);
    }
    if q.num == 0 {
        return Ok(1.0);
    }
    let one_minus = q
        .one_minus()
        .ok_or_else(|| Error::Internal(format!("term ratio {}/{} >= 1", q.num, q.den)))?;
    if terms <= 32 {
        let v = q.value();
        let mut s = 1.0;
        for _ in 1..terms {
            s = 1.0 + v * s;
        }
        return Ok(s);
    }
    let ln_q = q.ln().expect("0 < q < 1");
    Ok(-(terms as f64 * ln_q).exp_m1() / one_minus)
}

pub fn ub2(engine: &TermEngine) -> Result<PValue> {
    ub_k(engine, 1)
}

/// General bound with the terms `p_0 .. p_(k-1)` formed exactly. Falls back
/// to the exact p-value once `k - 1 > J`.
pub fn ub_k(engine: &TermEngine, k: u64) -> Result<PValue> {
    if k == 0 {
        return Err(Error::InvalidK(k));
    }
    engine.require_positive()?;
    let l = k - 1;
    let j = engine.j();
    if l > j {
        return exact_fisher(engine);
    }
    let mut sum = CompensatedSum::new(0.0);
    let mut term = 1.0;
    for i in 1..=l {
        sum.add(term);
        term *= engine.q(i).value();
    }
    sum.add(term * geometric_sum(engine.q(l + 1), j - l + 1)?);
    Ok(PValue::from_log(engine.log_p0() + sum.value().ln(), k))
}

/// `p_0 q² / (1 - q)` for a ratio `q < 1`, evaluated in log space.
fn scaled_tail_bound(log_scale: f64, q: TermRatio) -> Result<f64> {
    let Some(ln_q) = q.ln() else {
        return Ok(0.0);
    };
    let one_minus = q
        .one_minus()
        .ok_or_else(|| Error::Internal(format!("term ratio {}/{} >= 1", q.num, q.den)))?;
    Ok((log_scale + 2.0 * ln_q - one_minus.ln()).exp())
}

/// Upper bound on `ub2 - p_F`: `p_0 q_1² / (1 - q_1)`.
pub fn error_bound_ub2(engine: &TermEngine) -> Result<f64> {
    engine.require_positive()?;
    scaled_tail_bound(engine.log_p0(), engine.q(1))
}

/// Upper bound on `ub_k(k) - p_F`: `p_0 q_k² / (1 - q_k)`, and 0 once
/// `k > J` (every remaining factor is exact).
pub fn error_bound_ub_k(engine: &TermEngine, k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidK(k));
    }
    engine.require_positive()?;
    if k > engine.j() {
        return Ok(0.0);
    }
    scaled_tail_bound(engine.log_p0(), engine.q(k))
}

/// Same as [`error_bound_ub_k`] but scaled by `p_(k-1)` instead of `p_0`.
/// Never larger than the `p_0` form since the terms decrease.
pub fn error_bound_ub_k_tail(engine: &TermEngine, k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidK(k));
    }
    engine.require_positive()?;
    if k > engine.j() {
        return Ok(0.0);
    }
    let log_p_l = engine.log_p0()
        + (1..k)
            .map(|i| engine.q(i).ln().expect("q_i > 0 for i <= J"))
            .sum::<f64>();
    scaled_tail_bound(log_p_l, engine.q(k))
}

/// Lift thresholds above which the simple bounds stay within `p_0` of the
/// exact value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guarantees {
    /// `γ >= 2`: `ub1 - p_F <= p_0`.
    pub ub1: bool,
    /// `γ >= (1 + √5) / 2`: `ub2 - p_F <= p_0`.
    pub ub2: bool,
    /// Consequence of `ub2`: `ub2 <= 2 p_F`.
    pub ub2_within_factor_two: bool,
}

impl Guarantees {
    pub fn from_lift(lift: f64) -> Self {
        let ub2 = lift >= GOLDEN_RATIO;
        Guarantees {
            ub1: lift >= UB1_GUARANTEE_LIFT,
            ub2,
            ub2_within_factor_two: ub2,
        }
    }
}

pub fn guarantees(stats: &DerivedStats) -> Guarantees {
    Guarantees::from_lift(stats.lift)
}

/// Every approximation for one table.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxReport {
    pub table: ContingencyTable,
    pub stats: DerivedStats,
    /// Only present when requested; it is the O(J) path.
    pub exact: Option<PValue>,
    pub ub1: PValue,
    pub ub2: PValue,
    pub ub_k: PValue,
    pub k: u64,
    pub error_bound_ub2: f64,
    pub error_bound_ub_k: f64,
    pub guarantees: Guarantees,
    pub chi2: Chi2Result,
}

impl ApproxReport {
    pub fn j(&self) -> u64 {
        self.stats.j
    }

    pub fn any_clamped(&self) -> bool {
        self.ub1.clamped() || self.ub2.clamped() || self.ub_k.clamped()
    }
}

pub fn report(
    table: &ContingencyTable,
    k: u64,
    include_exact: bool,
    factorials: &LogFactorialTable,
) -> Result<ApproxReport> {
    if k == 0 {
        return Err(Error::InvalidK(k));
    }
    let engine = TermEngine::new(table, factorials)?;
    engine.require_positive()?;
    let stats = table.stats();
    Ok(ApproxReport {
        table: *table,
        stats,
        exact: include_exact.then(|| exact_fisher(&engine)).transpose()?,
        ub1: ub1(&engine)?,
        ub2: ub2(&engine)?,
        ub_k: ub_k(&engine, k)?,
        k,
        error_bound_ub2: error_bound_ub2(&engine)?,
        error_bound_ub_k: error_bound_ub_k(&engine, k)?,
        guarantees: guarantees(&stats),
        chi2: chi2_one_sided(table),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine(n: u64, mx: u64, ma: u64, mxa: u64) -> TermEngine {
        let t = ContingencyTable::new(n, mx, ma, mxa).unwrap();
        TermEngine::new(&t, &LogFactorialTable::build(n).unwrap()).unwrap()
    }

    fn close(got: f64, want: f64, tol: f64) {
        assert!((got - want).abs() <= tol, "got {got}, want {want} ± {tol}");
    }

    #[test]
    fn ub1_values() {
        close(
            ub1(&engine(1000, 500, 500, 263)).unwrap().linear_value(),
            0.0696,
            5e-5,
        );
        close(
            ub1(&engine(10000, 500, 2000, 115)).unwrap().linear_value(),
            0.0608,
            5e-5,
        );
        let e = engine(10, 4, 4, 4);
        assert_eq!(ub1(&e).unwrap(), PValue::from_log(e.log_p0(), 1));
        close(ub1(&e).unwrap().linear_value(), 1.0 / 210.0, 1e-17);
    }

    #[test]
    fn ub1_forms_agree() {
        for &(n, mx, ma, mxa) in &[
            (1000, 500, 500, 263),
            (1000, 200, 250, 60),
            (10000, 500, 2000, 128),
            (50, 10, 20, 9),
        ] {
            let t = ContingencyTable::new(n, mx, ma, mxa).unwrap();
            let leverage_form = ub1_multiplier(&t).unwrap();
            let lift_form = ub1_multiplier_from_lift(&t.stats());
            assert!((leverage_form - lift_form).abs() <= 1e-10 * leverage_form);
        }
    }

    #[test]
    fn ub1_not_applicable_without_positive_dependency() {
        assert!(matches!(
            ub1(&engine(1000, 500, 500, 250)),
            Err(Error::NotApplicable(_))
        ));
        assert!(matches!(
            ub1(&engine(1000, 500, 500, 200)),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn ub2_values() {
        close(
            ub2(&engine(1000, 500, 500, 263)).unwrap().linear_value(),
            0.0674,
            5e-5,
        );
        close(
            ub2(&engine(10000, 2000, 2500, 529)).unwrap().linear_value(),
            0.0611,
            5e-5,
        );
        // J = 1: ub2 = p_0 (1 + q_1) = p_F
        close(
            ub2(&engine(10, 4, 4, 3)).unwrap().linear_value(),
            25.0 / 210.0,
            1e-16,
        );
        assert_eq!(
            ub2(&engine(1000, 500, 500, 250)),
            Err(Error::NegativeDependency)
        );
    }

    #[test]
    fn ub_k_values() {
        close(
            ub_k(&engine(1000, 500, 500, 263), 3)
                .unwrap()
                .linear_value(),
            0.0617,
            5e-5,
        );
        close(
            ub_k(&engine(10000, 500, 2000, 128), 3)
                .unwrap()
                .linear_value(),
            0.00108,
            5e-6,
        );
        assert_eq!(ub_k(&engine(10, 4, 4, 3), 0), Err(Error::InvalidK(0)));
    }

    #[test]
    fn ub_k_one_is_ub2() {
        let e = engine(1000, 200, 250, 63);
        assert_eq!(ub_k(&e, 1).unwrap(), ub2(&e).unwrap());
    }

    #[test]
    fn ub_k_reaches_exact_value() {
        let e = engine(60, 20, 25, 12);
        let exact = exact_fisher(&e).unwrap();
        let j = e.j();
        assert_eq!(ub_k(&e, j + 2).unwrap(), exact);
        assert_eq!(ub_k(&e, j + 10).unwrap(), exact);
        let mut prev = f64::INFINITY;
        for k in 1..=j + 2 {
            let v = ub_k(&e, k).unwrap().raw_linear_value();
            assert!(v <= prev * (1.0 + 1e-14), "k={k}");
            assert!(v >= exact.linear_value() * (1.0 - 1e-14));
            prev = v;
        }
    }

    #[test]
    fn long_geometric_tail_uses_closed_form() {
        // J = 145 takes the expm1 route; compare with a direct sum
        let e = engine(1000, 200, 250, 55);
        let q = e.q(1);
        let direct: f64 = (0..146).map(|i| q.value().powi(i)).sum();
        let closed = geometric_sum(q, 146).unwrap();
        assert!((closed - direct).abs() <= 1e-13 * direct);
    }

    #[test]
    fn error_bound_ub2_examples() {
        let e = engine(10, 4, 4, 3);
        let bound = error_bound_ub2(&e).unwrap();
        let q1 = 1.0 / 24.0;
        close(bound, (24.0 / 210.0) * q1 * q1 / (1.0 - q1), 1e-17);
        assert_eq!(error_bound_ub2(&engine(10, 4, 4, 4)).unwrap(), 0.0);

        let e = engine(1000, 200, 250, 60);
        let err = ub2(&e).unwrap().linear_value() - exact_fisher(&e).unwrap().linear_value();
        close(err, 0.0055, 5e-4);
        assert!(err <= error_bound_ub2(&e).unwrap());
    }

    #[test]
    fn error_bound_ub_k_examples() {
        let e = engine(1000, 500, 500, 263);
        let err = ub_k(&e, 3).unwrap().linear_value() - exact_fisher(&e).unwrap().linear_value();
        let bound = error_bound_ub_k(&e, 3).unwrap();
        assert!(err >= 0.0 && err <= bound);
        assert!(error_bound_ub_k_tail(&e, 3).unwrap() <= bound);
        assert!(err <= error_bound_ub_k_tail(&e, 3).unwrap());

        let small = engine(10, 4, 4, 3);
        assert_eq!(error_bound_ub_k(&small, 2).unwrap(), 0.0);
        assert_eq!(error_bound_ub_k(&small, 0), Err(Error::InvalidK(0)));
        assert_eq!(
            error_bound_ub_k(&e, 1).unwrap(),
            error_bound_ub2(&e).unwrap()
        );

        let mut prev = f64::INFINITY;
        for k in 1..=e.j() + 2 {
            let b = error_bound_ub_k(&e, k).unwrap();
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn guarantee_thresholds() {
        let g = Guarantees::from_lift(2.0);
        assert!(g.ub1 && g.ub2 && g.ub2_within_factor_two);
        let g = Guarantees::from_lift(1.5);
        assert!(!g.ub1 && !g.ub2);
        let g = Guarantees::from_lift(1.7);
        assert!(!g.ub1 && g.ub2);
        assert!(!Guarantees::from_lift(1.618).ub2);
        assert!((GOLDEN_RATIO - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-16);
        // exactly 2 from integer counts
        let t = ContingencyTable::new(100, 10, 10, 2).unwrap();
        assert!(guarantees(&t.stats()).ub1);
    }

    #[test]
    fn report_row() {
        let t = ContingencyTable::new(1000, 500, 500, 269).unwrap();
        let r = report(&t, 3, true, &LogFactorialTable::build(1000).unwrap()).unwrap();
        close(r.exact.unwrap().linear_value(), 0.0096, 5e-5);
        close(r.ub1.linear_value(), 0.0107, 5e-5);
        close(r.ub2.linear_value(), 0.0105, 5e-5);
        close(r.ub_k.linear_value(), 0.0100, 5e-5);
        assert_eq!(r.k, 3);
        assert!(!r.any_clamped());

        let without = report(&t, 3, false, &LogFactorialTable::build(1000).unwrap()).unwrap();
        assert!(without.exact.is_none());
    }

    #[test]
    fn report_at_zero_j() {
        let t = ContingencyTable::new(10, 4, 4, 4).unwrap();
        let r = report(&t, 3, true, &LogFactorialTable::build(10).unwrap()).unwrap();
        let exact = r.exact.unwrap().linear_value();
        assert_eq!(r.ub1.linear_value(), exact);
        assert_eq!(r.ub2.linear_value(), exact);
        assert_eq!(r.ub_k.linear_value(), exact);
    }

    #[test]
    fn clamps_weak_dependency_bounds() {
        // lift barely above 1: ub1 multiplier is huge
        let t = ContingencyTable::new(10000, 5000, 5000, 2501).unwrap();
        let r = report(&t, 3, true, &LogFactorialTable::build(10000).unwrap()).unwrap();
        assert!(r.ub1.clamped());
        assert_eq!(r.ub1.linear_value(), 1.0);
        assert!(r.ub1.raw_linear_value() > 1.0);
        assert!(r.any_clamped());
    }
}
