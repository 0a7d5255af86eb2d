//! Evaluation of a single table and the shared output columns.

use std::fmt::Write as _;

use fisher_bounds::{report, ApproxReport, ContingencyTable, LogFactorialCache};

use crate::format::{sig6, sig6_opt};
use crate::{CliError, Result};

pub const REPORT_HEADER: [&str; 20] = [
    "id",
    "n",
    "mx",
    "ma",
    "mxa",
    "j",
    "lift",
    "leverage",
    "odds",
    "p_fisher",
    "ub1",
    "ub2",
    "ubk",
    "k",
    "err_bound",
    "chi2_p",
    "min_expected",
    "guarantee_ub1",
    "guarantee_ub2",
    "clamped",
];

pub const LOG_KEYS_HEADER: [&str; 6] = [
    "id",
    "log_p_fisher",
    "log_ub1",
    "log_ub2",
    "log_ubk",
    "log_chi2_p",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub k: u64,
    pub negate: bool,
    pub include_exact: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            k: crate::DEFAULT_K,
            negate: false,
            include_exact: true,
        }
    }
}

/// Builds, optionally negates, and evaluates one table.
pub fn evaluate(counts: [u64; 4], opts: EvalOptions) -> Result<ApproxReport> {
    let [n, mx, ma, mxa] = counts;
    let mut table = ContingencyTable::new(n, mx, ma, mxa)?;
    if opts.negate {
        table = table.negate_consequent();
    }
    if !table.is_positive() {
        return Err(CliError::Validation(format!(
            "{table} has no positive dependency (leverage {}); use --negate to test X -> not A",
            sig6(table.stats().leverage)
        )));
    }
    let factorials = LogFactorialCache::global().snapshot(table.n())?;
    Ok(report(&table, opts.k, opts.include_exact, &factorials)?)
}

/// One output row in [`REPORT_HEADER`] order.
pub fn report_fields(id: &str, r: &ApproxReport) -> Vec<String> {
    let t = &r.table;
    vec![
        id.to_string(),
        t.n().to_string(),
        t.m_x().to_string(),
        t.m_a().to_string(),
        t.m_xa().to_string(),
        r.j().to_string(),
        sig6(r.stats.lift),
        sig6(r.stats.leverage),
        sig6(r.stats.odds_ratio),
        sig6_opt(r.exact.map(|p| p.linear_value())),
        sig6(r.ub1.linear_value()),
        sig6(r.ub2.linear_value()),
        sig6(r.ub_k.linear_value()),
        r.k.to_string(),
        sig6(r.error_bound_ub_k),
        sig6(r.chi2.p_one_sided),
        sig6(r.chi2.min_expected),
        r.guarantees.ub1.to_string(),
        r.guarantees.ub2.to_string(),
        r.any_clamped().to_string(),
    ]
}

/// Unrounded log-space keys in [`LOG_KEYS_HEADER`] order.
pub fn log_key_fields(id: &str, r: &ApproxReport) -> Vec<String> {
    vec![
        id.to_string(),
        r.exact
            .map(|p| p.log_value().to_string())
            .unwrap_or_default(),
        r.ub1.raw_log_value().to_string(),
        r.ub2.raw_log_value().to_string(),
        r.ub_k.raw_log_value().to_string(),
        r.chi2.log_p_one_sided.to_string(),
    ]
}

pub fn render_text(r: &ApproxReport) -> String {
    let t = &r.table;
    let s = &r.stats;
    let mut out = String::new();
    let mut line = |label: &str, value: String| {
        let _ = writeln!(out, "{label:<15} {value}");
    };
    line("table", t.to_string());
    line(
        "cells",
        format!(
            "m(XA)={} m(X¬A)={} m(¬XA)={} m(¬X¬A)={}",
            t.m_xa(),
            t.m_x_not_a(),
            t.m_not_x_a(),
            t.m_not_x_not_a()
        ),
    );
    line("J", r.j().to_string());
    line("lift", sig6(s.lift));
    line("leverage", sig6(s.leverage));
    line("odds_ratio", sig6(s.odds_ratio));
    if let Some(p) = r.exact {
        line(
            "p_fisher",
            format!(
                "{}  ({} terms)",
                sig6(p.linear_value()),
                p.terms_evaluated()
            ),
        );
    }
    let clamp = |p: &fisher_bounds::PValue| if p.clamped() { "  (clamped)" } else { "" };
    line(
        "ub1",
        format!("{}{}", sig6(r.ub1.linear_value()), clamp(&r.ub1)),
    );
    line(
        "ub2",
        format!("{}{}", sig6(r.ub2.linear_value()), clamp(&r.ub2)),
    );
    line(
        &format!("ubk (k={})", r.k),
        format!("{}{}", sig6(r.ub_k.linear_value()), clamp(&r.ub_k)),
    );
    line("err_bound_ub2", sig6(r.error_bound_ub2));
    line("err_bound_ubk", sig6(r.error_bound_ub_k));
    line(
        "chi2_p",
        format!(
            "{}  (statistic {}, min expected {}{})",
            sig6(r.chi2.p_one_sided),
            sig6(r.chi2.statistic),
            sig6(r.chi2.min_expected),
            if r.chi2.rule_of_thumb_ok {
                ""
            } else {
                ", below 5"
            }
        ),
    );
    line("guarantee_ub1", r.guarantees.ub1.to_string());
    line("guarantee_ub2", r.guarantees.ub2.to_string());
    out
}
