//! Timing of the exact sum against the constant-time bounds as `J` grows.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::{Duration, Instant};

use fisher_bounds::{
    bounds, exact_fisher, ContingencyTable, LogFactorialCache, LogFactorialTable, TermEngine,
};

use crate::format::sig6;
use crate::Result;

/// Largest allowed ratio between the slowest and fastest median of a bound.
pub const BOUND_FLATNESS: f64 = 2.0;

/// Minimum growth of the exact median per doubling of `J`.
pub const EXACT_GROWTH_PER_DOUBLING: f64 = 1.5;

/// Each timed batch runs at least this long.
const MIN_BATCH: Duration = Duration::from_micros(200);

pub const METHODS: [&str; 4] = ["exact", "ub1", "ub2", "ubk"];

/// The large configuration used to count exact terms.
pub const SCALE_CONFIG: [u64; 4] = [1_000_000, 500_000, 500_000, 300_000];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchOptions {
    /// Data sizes; each uses `m(X) = m(A) = n/2`, `m(XA) = 0.6 m(X)`.
    pub sizes: Vec<u64>,
    pub repetitions: usize,
    pub k: u64,
    pub scale_check: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            sizes: default_sizes(),
            repetitions: 15,
            k: crate::DEFAULT_K,
            scale_check: true,
        }
    }
}

/// `n = 1000 * 2^i` for `i < 8`, so `J` runs from 200 to 25600.
pub fn default_sizes() -> Vec<u64> {
    (0..8).map(|i| 1000u64 << i).collect()
}

pub fn config_for(n: u64) -> Result<ContingencyTable> {
    let m = n / 2;
    Ok(ContingencyTable::new(n, m, m, m * 3 / 5)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub table: ContingencyTable,
    pub j: u64,
    /// Median seconds per call in [`METHODS`] order.
    pub median: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub scale_terms: Option<u64>,
}

impl BenchReport {
    /// Slowest over fastest median for one method.
    pub fn spread(&self, method: usize) -> f64 {
        let (lo, hi) = self
            .rows
            .iter()
            .map(|r| r.median[method])
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), t| {
                (lo.min(t), hi.max(t))
            });
        hi / lo
    }

    /// Least-squares slope of log2(time) against log2(J).
    pub fn log_log_slope(&self, method: usize) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .map(|r| ((r.j as f64).log2(), r.median[method].log2()))
            .collect();
        let n = pts.len() as f64;
        let (mx, my) = pts
            .iter()
            .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        sxy / sxx
    }

    pub fn bounds_flat(&self) -> bool {
        (1..METHODS.len()).all(|m| self.spread(m) <= BOUND_FLATNESS)
    }

    pub fn exact_grows(&self) -> bool {
        self.log_log_slope(0) >= EXACT_GROWTH_PER_DOUBLING.log2()
    }

    pub fn scale_ok(&self) -> bool {
        self.scale_terms.is_none_or(|t| t == 200_001)
    }

    /// True for an empty report.
    pub fn passed(&self) -> bool {
        self.rows.len() < 2 || (self.bounds_flat() && self.exact_grows() && self.scale_ok())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n,mx,ma,mxa,j,exact_s,ub1_s,ub2_s,ubk_s");
        for r in &self.rows {
            let t = &r.table;
            let times: Vec<String> = r.median.iter().map(|v| sig6(*v)).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                t.n(),
                t.m_x(),
                t.m_a(),
                t.m_xa(),
                r.j,
                times.join(",")
            );
        }
        if self.rows.len() >= 2 {
            for (m, name) in METHODS.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "# {name}: spread {} slope {}",
                    sig6(self.spread(m)),
                    sig6(self.log_log_slope(m))
                );
            }
            let _ = writeln!(
                out,
                "# bounds within {BOUND_FLATNESS}x: {}",
                self.bounds_flat()
            );
            let _ = writeln!(
                out,
                "# exact grows at least {EXACT_GROWTH_PER_DOUBLING}x per doubling: {}",
                self.exact_grows()
            );
        }
        if let Some(t) = self.scale_terms {
            let [n, mx, ma, mxa] = SCALE_CONFIG;
            let _ = writeln!(out, "# exact terms at n={n} mx={mx} ma={ma} mxa={mxa}: {t}");
        }
        out
    }
}

fn call(method: usize, table: &ContingencyTable, lf: &LogFactorialTable, k: u64) -> f64 {
    let engine = TermEngine::new(table, lf).expect("bench tables are within the factorial table");
    let p = match method {
        0 => exact_fisher(&engine),
        1 => bounds::ub1(&engine),
        2 => bounds::ub2(&engine),
        _ => bounds::ub_k(&engine, k),
    };
    p.expect("bench tables have positive dependency")
        .raw_log_value()
}

fn time_batch(iters: u64, mut f: impl FnMut() -> f64) -> Duration {
    let start = Instant::now();
    for _ in 0..iters {
        black_box(f());
    }
    start.elapsed()
}

/// Median seconds per call over `repetitions` batches, after a warmup that
/// also sizes the batches.
fn median_per_call(repetitions: usize, mut f: impl FnMut() -> f64) -> f64 {
    let mut iters = 1u64;
    while time_batch(iters, &mut f) < MIN_BATCH {
        iters *= 2;
    }
    let mut samples: Vec<f64> = (0..repetitions)
        .map(|_| time_batch(iters, &mut f).as_secs_f64() / iters as f64)
        .collect();
    samples.sort_by(f64::total_cmp);
    samples[samples.len() / 2]
}

pub fn run_bench(opts: &BenchOptions) -> Result<BenchReport> {
    if opts.repetitions == 0 {
        return Ok(BenchReport {
            rows: Vec::new(),
            scale_terms: None,
        });
    }
    let max_n = opts.sizes.iter().copied().max().unwrap_or(0);
    let lf = LogFactorialCache::global().snapshot(max_n)?;
    let mut rows = Vec::new();
    for &n in &opts.sizes {
        let table = config_for(n)?;
        let mut median = [0.0; 4];
        for (m, slot) in median.iter_mut().enumerate() {
            *slot = median_per_call(opts.repetitions, || call(m, black_box(&table), &lf, opts.k));
        }
        rows.push(BenchRow {
            table,
            j: table.j(),
            median,
        });
    }
    let scale_terms = if opts.scale_check {
        let [n, mx, ma, mxa] = SCALE_CONFIG;
        let t = ContingencyTable::new(n, mx, ma, mxa)?;
        let lf = LogFactorialCache::global().snapshot(n)?;
        Some(exact_fisher(&TermEngine::new(&t, &lf)?)?.terms_evaluated())
    } else {
        None
    };
    Ok(BenchReport { rows, scale_terms })
}
