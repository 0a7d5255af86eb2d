//! Agreement between rankings by the exact p-value and by its approximations.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Read;

use fisher_bounds::ApproxReport;

use crate::batch::{evaluate_rows, BatchOptions};
use crate::eval::EvalOptions;
use crate::format::sig6;
use crate::input::read_rows;
use crate::Result;

pub const MEASURES: [&str; 5] = ["p_fisher", "ub1", "ub2", "ubk", "chi2_p"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankOptions {
    pub top_k: usize,
    pub k: u64,
    pub negate: bool,
    pub jobs: usize,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            top_k: 100,
            k: crate::DEFAULT_K,
            negate: false,
            jobs: 1,
        }
    }
}

/// A row to rank: its id and log-space keys in [`MEASURES`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedRow {
    pub id: String,
    pub keys: [f64; 5],
}

impl RankedRow {
    pub fn from_report(id: &str, r: &ApproxReport) -> Self {
        let exact = r
            .exact
            .expect("rank agreement always evaluates the exact value");
        RankedRow {
            id: id.to_string(),
            keys: [
                exact.log_value(),
                r.ub1.raw_log_value(),
                r.ub2.raw_log_value(),
                r.ub_k.raw_log_value(),
                r.chi2.log_p_one_sided,
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankAgreement {
    pub rows: usize,
    pub skipped: usize,
    /// Effective K, at most the number of rows.
    pub top_k: usize,
    /// Fraction of the exact top-K found in each measure's top-K.
    pub top_k_overlap: [f64; 5],
    /// Spearman correlation between every pair of measures.
    pub spearman: [[f64; 5]; 5],
}

impl RankAgreement {
    pub fn top_k_identical(&self, measure: usize) -> bool {
        self.top_k_overlap[measure] == 1.0
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "rows {}  skipped {}  top_k {}",
            self.rows, self.skipped, self.top_k
        );
        let _ = writeln!(out, "measure,top_k_overlap,identical");
        for (i, m) in MEASURES.iter().enumerate() {
            let _ = writeln!(
                out,
                "{m},{},{}",
                sig6(self.top_k_overlap[i]),
                self.top_k_identical(i)
            );
        }
        let _ = writeln!(out, "spearman,{}", MEASURES.join(","));
        for (i, m) in MEASURES.iter().enumerate() {
            let row: Vec<String> = self.spearman[i].iter().map(|v| sig6(*v)).collect();
            let _ = writeln!(out, "{m},{}", row.join(","));
        }
        out
    }
}

/// Row indices sorted by one measure, most significant first. Ties go to
/// the smaller id, then the earlier row.
pub fn ordering(rows: &[RankedRow], measure: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    idx.sort_by(|&a, &b| {
        rows[a].keys[measure]
            .total_cmp(&rows[b].keys[measure])
            .then_with(|| rows[a].id.cmp(&rows[b].id))
            .then(a.cmp(&b))
    });
    idx
}

fn spearman(rank_a: &[usize], rank_b: &[usize]) -> f64 {
    let n = rank_a.len();
    if n < 2 {
        return 1.0;
    }
    let d2: f64 = rank_a
        .iter()
        .zip(rank_b)
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            d * d
        })
        .sum();
    let n = n as f64;
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

pub fn agreement(rows: &[RankedRow], top_k: usize, skipped: usize) -> RankAgreement {
    let orders: Vec<Vec<usize>> = (0..MEASURES.len()).map(|m| ordering(rows, m)).collect();
    let ranks: Vec<Vec<usize>> = orders
        .iter()
        .map(|o| {
            let mut r = vec![0; o.len()];
            for (pos, &i) in o.iter().enumerate() {
                r[i] = pos;
            }
            r
        })
        .collect();
    let k = top_k.min(rows.len());
    let exact_top: HashSet<usize> = orders[0][..k].iter().copied().collect();
    let mut overlap = [1.0; 5];
    if k > 0 {
        for (m, o) in orders.iter().enumerate() {
            let common = o[..k].iter().filter(|i| exact_top.contains(i)).count();
            overlap[m] = common as f64 / k as f64;
        }
    }
    let mut matrix = [[1.0; 5]; 5];
    for a in 0..MEASURES.len() {
        for b in 0..MEASURES.len() {
            matrix[a][b] = spearman(&ranks[a], &ranks[b]);
        }
    }
    RankAgreement {
        rows: rows.len(),
        skipped,
        top_k: k,
        top_k_overlap: overlap,
        spearman: matrix,
    }
}

/// Ranks the rows of an `id,n,mx,ma,mxa` file. Invalid rows and rows
/// without a positive dependency are skipped.
pub fn rank_agreement<R: Read>(input: R, opts: RankOptions) -> Result<RankAgreement> {
    let rows = read_rows(input)?;
    let batch = BatchOptions {
        eval: EvalOptions {
            k: opts.k,
            negate: opts.negate,
            include_exact: true,
        },
        jobs: opts.jobs,
    };
    let outcomes = evaluate_rows(&rows, batch)?;
    let ranked: Vec<RankedRow> = rows
        .iter()
        .zip(&outcomes)
        .filter_map(|(row, o)| o.as_ref().ok().map(|r| RankedRow::from_report(&row.id, r)))
        .collect();
    Ok(agreement(&ranked, opts.top_k, rows.len() - ranked.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_agrees_trivially() {
        let r = rank_agreement(
            "id,n,mx,ma,mxa\na,1000,500,500,263\n".as_bytes(),
            RankOptions::default(),
        )
        .unwrap();
        assert_eq!(r.rows, 1);
        assert_eq!(r.top_k, 1);
        assert!(r.top_k_overlap.iter().all(|&v| v == 1.0));
        assert!(r.spearman.iter().flatten().all(|&v| v == 1.0));
    }

    #[test]
    fn ties_break_by_id() {
        let rows = vec![
            RankedRow {
                id: "b".into(),
                keys: [-1.0; 5],
            },
            RankedRow {
                id: "a".into(),
                keys: [-1.0; 5],
            },
            RankedRow {
                id: "c".into(),
                keys: [-2.0; 5],
            },
        ];
        assert_eq!(ordering(&rows, 0), [2, 1, 0]);
    }

    #[test]
    fn reversed_order_has_negative_correlation() {
        let rows: Vec<RankedRow> = (0..10)
            .map(|i| {
                let x = -(i as f64);
                RankedRow {
                    id: format!("r{i}"),
                    keys: [x, x, x, x, -x],
                }
            })
            .collect();
        let r = agreement(&rows, 3, 0);
        assert_eq!(r.spearman[0][4], -1.0);
        assert_eq!(r.top_k_overlap[4], 0.0);
        assert_eq!(r.top_k_overlap[1], 1.0);
    }

    #[test]
    fn skips_invalid_and_non_positive_rows() {
        let input = "id,n,mx,ma,mxa\na,1000,500,500,263\nb,1000,500,500,250\nc,1000,500,500,700\n";
        let r = rank_agreement(input.as_bytes(), RankOptions::default()).unwrap();
        assert_eq!((r.rows, r.skipped), (1, 2));
    }
}
