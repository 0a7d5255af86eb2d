//! Curves of the exact value and the bounds over a range of `m(XA)` with
//! fixed margins.

use std::io::Write;

use fisher_bounds::{
    bounds, chi2_one_sided, exact_fisher, ContingencyTable, LogFactorialCache, TermEngine,
};

use crate::format::{sig6, sig6_opt};
use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSpec {
    pub n: u64,
    pub m_x: u64,
    pub m_a: u64,
    /// Inclusive range of `m(XA)`.
    pub m_xa_from: u64,
    pub m_xa_to: u64,
    /// Extra exact-term counts; `ub3` (k = 3) is always included.
    pub ks: Vec<u64>,
    pub include_exact: bool,
}

/// One point of a sweep. Bound fields are `None` when the table has no
/// positive dependency.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub m_xa: u64,
    pub j: u64,
    /// Terms in the exact sum, `J + 1`.
    pub terms: u64,
    pub lift: f64,
    pub leverage: f64,
    pub p_fisher: Option<f64>,
    pub ub1: Option<f64>,
    pub ub2: Option<f64>,
    pub ub3: Option<f64>,
    pub extra: Vec<Option<f64>>,
    pub err_bound_ub2: Option<f64>,
    pub chi2_p: f64,
    /// Some bound exceeded 1 and was reported as 1.
    pub clamped: bool,
}

impl SweepSpec {
    fn extra_ks(&self) -> Vec<u64> {
        let mut ks: Vec<u64> = self.ks.iter().copied().filter(|&k| k != 3).collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = [
            "mxa", "j", "terms", "lift", "leverage", "p_fisher", "ub1", "ub2", "ub3",
        ]
        .map(String::from)
        .to_vec();
        h.extend(self.extra_ks().iter().map(|k| format!("ubk{k}")));
        h.extend(["err_bound_ub2", "chi2_p", "clamped"].map(String::from));
        h
    }

    fn validate(&self) -> Result<()> {
        if self.m_xa_from > self.m_xa_to {
            return Err(CliError::Usage(format!(
                "empty m(XA) range {}..{}",
                self.m_xa_from, self.m_xa_to
            )));
        }
        if let Some(&k) = self.ks.iter().find(|&&k| k == 0) {
            return Err(fisher_bounds::Error::InvalidK(k).into());
        }
        for end in [self.m_xa_from, self.m_xa_to] {
            ContingencyTable::new(self.n, self.m_x, self.m_a, end)?;
        }
        Ok(())
    }
}

pub fn sweep_rows(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let factorials = LogFactorialCache::global().snapshot(spec.n)?;
    let extra = spec.extra_ks();
    (spec.m_xa_from..=spec.m_xa_to)
        .map(|m_xa| {
            let table = ContingencyTable::new(spec.n, spec.m_x, spec.m_a, m_xa)?;
            let stats = table.stats();
            let engine = TermEngine::new(&table, &factorials)?;
            let positive = table.is_positive();
            let clamped = std::cell::Cell::new(false);
            let bound =
                |f: &dyn Fn(&TermEngine) -> fisher_bounds::Result<fisher_bounds::PValue>| {
                    positive
                        .then(|| {
                            f(&engine).map(|p| {
                                clamped.set(clamped.get() || p.clamped());
                                p.linear_value()
                            })
                        })
                        .transpose()
                };
            Ok(SweepRow {
                m_xa,
                j: stats.j,
                terms: stats.j + 1,
                lift: stats.lift,
                leverage: stats.leverage,
                p_fisher: if spec.include_exact {
                    bound(&exact_fisher)?
                } else {
                    None
                },
                ub1: bound(&bounds::ub1)?,
                ub2: bound(&bounds::ub2)?,
                ub3: bound(&|e| bounds::ub_k(e, 3))?,
                extra: extra
                    .iter()
                    .map(|&k| bound(&|e| bounds::ub_k(e, k)))
                    .collect::<fisher_bounds::Result<_>>()?,
                err_bound_ub2: positive
                    .then(|| bounds::error_bound_ub2(&engine))
                    .transpose()?,
                chi2_p: chi2_one_sided(&table).p_one_sided,
                clamped: clamped.get(),
            })
        })
        .collect()
}

pub fn write_sweep<W: Write>(spec: &SweepSpec, output: W) -> Result<usize> {
    let rows = sweep_rows(spec)?;
    let mut out = csv::Writer::from_writer(output);
    out.write_record(spec.header())?;
    for r in &rows {
        let mut fields = vec![
            r.m_xa.to_string(),
            r.j.to_string(),
            r.terms.to_string(),
            sig6(r.lift),
            sig6(r.leverage),
            sig6_opt(r.p_fisher),
            sig6_opt(r.ub1),
            sig6_opt(r.ub2),
            sig6_opt(r.ub3),
        ];
        fields.extend(r.extra.iter().map(|v| sig6_opt(*v)));
        fields.push(sig6_opt(r.err_bound_ub2));
        fields.push(sig6(r.chi2_p));
        fields.push(r.clamped.to_string());
        out.write_record(fields)?;
    }
    out.flush()?;
    Ok(rows.len())
}
