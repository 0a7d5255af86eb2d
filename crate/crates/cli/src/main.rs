use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fisher_bounds_cli::batch::{run_batch, BatchOptions};
use fisher_bounds_cli::bench::{default_sizes, run_bench, BenchOptions};
use fisher_bounds_cli::eval::{evaluate, render_text, report_fields, EvalOptions, REPORT_HEADER};
use fisher_bounds_cli::rank::{rank_agreement, RankOptions};
use fisher_bounds_cli::reproduce::{reproduce, ReproduceOptions};
use fisher_bounds_cli::sweep::{write_sweep, SweepSpec};
use fisher_bounds_cli::{CliError, Result, DEFAULT_K};

#[derive(Parser)]
#[command(
    name = "fisher-bounds",
    version,
    about = "Exact one-sided Fisher p-values and constant-time upper bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct BoundArgs {
    /// Leading terms evaluated exactly by the general bound.
    #[arg(long, default_value_t = DEFAULT_K, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Test X -> not A instead of X -> A.
    #[arg(long)]
    negate: bool,
    /// Skip the exact p-value.
    #[arg(long)]
    no_exact: bool,
}

impl BoundArgs {
    fn options(self) -> EvalOptions {
        EvalOptions {
            k: self.k,
            negate: self.negate,
            include_exact: !self.no_exact,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one table.
    Eval {
        n: u64,
        mx: u64,
        ma: u64,
        mxa: u64,
        #[command(flatten)]
        bounds: BoundArgs,
        /// Print one CSV row instead of the text report.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every row of an `id,n,mx,ma,mxa` CSV file.
    Batch {
        input: PathBuf,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Defaults to `<out>.rejects.csv`, or stderr when writing to stdout.
        #[arg(long)]
        rejects: Option<PathBuf>,
        /// Also write unrounded log-space keys here.
        #[arg(long)]
        log_keys: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Evaluate a range of m(XA) with fixed margins.
    Sweep {
        n: u64,
        mx: u64,
        ma: u64,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        /// Extra exact-term counts; may be repeated.
        #[arg(long = "k", value_parser = clap::value_parser!(u64).range(1..))]
        ks: Vec<u64>,
        #[arg(long)]
        no_exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the reference comparison tables.
    ReproduceTables {
        #[arg(long)]
        case: Option<u8>,
        #[arg(long)]
        n: Option<u64>,
        /// Absolute tolerance replacing the per-cell ones.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare rankings by the exact value and the approximations.
    RankAgreement {
        input: PathBuf,
        #[arg(long, default_value_t = 100)]
        top_k: usize,
        #[arg(long, default_value_t = DEFAULT_K, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long)]
        negate: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the exact value against the bounds as J grows.
    Bench {
        /// Data sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<u64>>,
        #[arg(long, default_value_t = 15)]
        repetitions: usize,
        #[arg(long, default_value_t = DEFAULT_K, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        /// Skip counting terms at n = 1 000 000.
        #[arg(long)]
        no_scale: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn create(path: &Path) -> Result<Box<dyn Write>> {
    Ok(Box::new(BufWriter::new(File::create(path)?)))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => create(p),
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn open(path: &Path) -> Result<impl Read> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

fn rejects_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".rejects.csv");
    PathBuf::from(name)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Eval {
            n,
            mx,
            ma,
            mxa,
            bounds,
            csv,
            out,
        } => {
            let report = evaluate([n, mx, ma, mxa], bounds.options())?;
            let mut w = output(out.as_deref())?;
            if csv {
                let mut csv = csv::Writer::from_writer(&mut w);
                csv.write_record(REPORT_HEADER)?;
                csv.write_record(report_fields("", &report))?;
                csv.flush()?;
            } else {
                w.write_all(render_text(&report).as_bytes())?;
            }
            w.flush()?;
        }
        Command::Batch {
            input,
            bounds,
            out,
            rejects,
            log_keys,
            jobs,
        } => {
            let rejects = rejects.or_else(|| out.as_deref().map(rejects_path));
            let rejects: Box<dyn Write> = match &rejects {
                Some(p) => create(p)?,
                None => Box::new(io::stderr().lock()),
            };
            let mut keys = log_keys.as_deref().map(create).transpose()?;
            let summary = run_batch(
                open(&input)?,
                output(out.as_deref())?,
                rejects,
                keys.as_mut().map(|k| k as &mut dyn Write),
                BatchOptions {
                    eval: bounds.options(),
                    jobs,
                },
            )?;
            if out.is_some() {
                eprintln!(
                    "{} rows written, {} rejected",
                    summary.accepted, summary.rejected
                );
            }
        }
        Command::Sweep {
            n,
            mx,
            ma,
            from,
            to,
            ks,
            no_exact,
            out,
        } => {
            let spec = SweepSpec {
                n,
                m_x: mx,
                m_a: ma,
                m_xa_from: from,
                m_xa_to: to,
                ks,
                include_exact: !no_exact,
            };
            let mut w = output(out.as_deref())?;
            write_sweep(&spec, &mut w)?;
            w.flush()?;
        }
        Command::ReproduceTables {
            case,
            n,
            tolerance,
            out,
        } => {
            let r = reproduce(ReproduceOptions { case, n, tolerance })?;
            let mut w = output(out.as_deref())?;
            w.write_all(r.render().as_bytes())?;
            w.flush()?;
            if !r.passed() {
                return Err(CliError::ReproductionFailed(r.failures()));
            }
        }
        Command::RankAgreement {
            input,
            top_k,
            k,
            negate,
            jobs,
            out,
        } => {
            let r = rank_agreement(
                open(&input)?,
                RankOptions {
                    top_k,
                    k,
                    negate,
                    jobs,
                },
            )?;
            let mut w = output(out.as_deref())?;
            w.write_all(r.render().as_bytes())?;
            w.flush()?;
        }
        Command::Bench {
            sizes,
            repetitions,
            k,
            no_scale,
            out,
        } => {
            let opts = BenchOptions {
                sizes: sizes.unwrap_or_else(default_sizes),
                repetitions,
                k,
                scale_check: !no_scale,
            };
            let r = run_bench(&opts)?;
            let mut w = output(out.as_deref())?;
            w.write_all(r.render().as_bytes())?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
