//! Exact one-sided Fisher p-values for 2x2 contingency tables, and a family
//! of constant-time upper bounds on them.
//!
//! The exact value sums `J + 1` hypergeometric terms. The bounds form the
//! first few terms exactly and bound the remainder by a geometric series,
//! which keeps the cost independent of `J`:
//!
//! ```
//! use fisher_bounds::{ContingencyTable, LogFactorialTable, TermEngine};
//! use fisher_bounds::{bounds, fisher};
//!
//! let table = ContingencyTable::new(1000, 500, 500, 263).unwrap();
//! let factorials = LogFactorialTable::build(table.n()).unwrap();
//! let engine = TermEngine::new(&table, &factorials).unwrap();
//!
//! let exact = fisher::exact_fisher(&engine).unwrap();
//! let ub1 = bounds::ub1(&engine).unwrap();
//! let ub3 = bounds::ub_k(&engine, 3).unwrap();
//! assert!(exact.linear_value() <= ub3.linear_value());
//! assert!(ub3.linear_value() <= ub1.linear_value());
//! ```

pub mod bounds;
pub mod chi2;
pub mod contingency;
pub mod error;
pub mod fisher;
pub mod logfact;
pub mod oracle;
pub mod pvalue;

pub use bounds::{report, ApproxReport, Guarantees};
pub use chi2::{chi2_one_sided, Chi2Result};
pub use contingency::{ContingencyTable, DerivedStats};
pub use error::{Error, Result};
pub use fisher::{exact_fisher, TermEngine, TermRatio};
pub use logfact::{LogFactorialCache, LogFactorialTable};
pub use pvalue::PValue;
