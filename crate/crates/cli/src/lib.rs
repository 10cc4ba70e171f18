//! Argument parsing and report generation for the `carleman` binary.
//!
//! Exit codes: 0 on success, 1 when a computation fails numerically, 2 on
//! malformed or inconsistent arguments.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use carleman_core::bennett::{alpha_grid, bennett_row, lemma0_bounds, BennettRow};
use carleman_core::constants::compare_m_l;
use carleman_core::extremal::{solve_mu_n, DEFAULT_TOL};
use carleman_core::matrixnorm::{estimate_norm_lp_with, NormOptions};
use carleman_core::{verify_inequality, Error, TermSequence, WeightProfile, WeightSequence};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightSource {
    Power(f64),
    Unit,
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Task {
    Constants {
        weights: WeightSource,
        horizon: Option<usize>,
    },
    Verify {
        weights: WeightSource,
        terms_file: PathBuf,
        constant: f64,
    },
    Extremal {
        weights: WeightSource,
        n: usize,
        tol: f64,
    },
    Norm {
        weights: WeightSource,
        n: usize,
        p: f64,
        iters: usize,
        tol: f64,
        restarts: bool,
    },
    Bennett {
        alpha_min: f64,
        alpha_max: f64,
        alpha_step: f64,
        n_max: usize,
        x_samples: usize,
    },
    Lemma {
        n: usize,
        r: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub jobs: usize,
}

/// Why [`parse_args`] did not produce a config.
#[derive(Clone, Debug, PartialEq)]
pub enum ArgsOutcome {
    /// `--help` or `--version`; the text goes to stdout and the exit is clean.
    Info(String),
    /// One-line diagnostic for stderr.
    Usage(String),
}

#[derive(Parser, Debug)]
#[command(
    name = "carleman",
    version,
    about = "Weighted Carleman inequality toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report the constants L and M over a finite horizon
    Constants {
        #[command(flatten)]
        weights: WeightArgs,
        /// Largest n in the supremum (default: file length - 1)
        #[arg(long)]
        horizon: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Check the inequality for one sequence of terms
    Verify {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, value_name = "PATH")]
        terms_file: PathBuf,
        /// Constant C [default: e]
        #[arg(long = "C", value_name = "C", value_parser = positive)]
        constant: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Solve for the N-term best constant and its maximizing sequence
    Extremal {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, value_parser = at_least_one)]
        n: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Lower-bound the l^p norm of the N x N weighted mean matrix
    Norm {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, value_parser = above_one)]
        p: f64,
        #[arg(long, value_parser = at_least_one)]
        n: usize,
        #[arg(long, default_value_t = 10_000, value_parser = at_least_one)]
        iters: usize,
        /// Also start from e_1 and from a seeded random vector
        #[arg(long)]
        restarts: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Scan the power-weight condition over a grid of exponents
    Bennett {
        #[arg(long, default_value_t = 0.01, value_parser = open_unit)]
        alpha_min: f64,
        #[arg(long, default_value_t = 0.99, value_parser = open_unit)]
        alpha_max: f64,
        #[arg(long, default_value_t = 0.01, value_parser = positive)]
        alpha_step: f64,
        #[arg(long, default_value_t = 10_000, value_parser = at_least_one)]
        n_max: usize,
        #[arg(long, default_value_t = 10_000, value_parser = at_least_one)]
        x_samples: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Power-sum bounds for one n and exponent r
    Lemma {
        #[arg(long, value_parser = at_least_one)]
        n: usize,
        #[arg(long, value_parser = lemma_exponent)]
        r: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct WeightArgs {
    /// Weights k^alpha
    #[arg(long, value_name = "ALPHA", allow_hyphen_values = true, value_parser = finite)]
    power: Option<f64>,
    /// One weight per line
    #[arg(long, value_name = "PATH")]
    weights_file: Option<PathBuf>,
    /// All weights equal to 1
    #[arg(long)]
    unit: bool,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Report format [default: csv for bennett, json otherwise]
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Solver tolerance for extremal and norm
    #[arg(long, value_parser = positive)]
    tol: Option<f64>,
    /// Worker threads for grid scans
    #[arg(long, default_value_t = 1, value_parser = at_least_one)]
    jobs: usize,
}

fn number(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .map_err(|_| format!("`{s}` is not a number"))
}

fn finite(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not finite"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn above_one(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if v > 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be greater than 1"))
    }
}

fn open_unit(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} must lie strictly between 0 and 1"))
    }
}

fn lemma_exponent(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} must lie in (0, 1]"))
    }
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("`{s}` is not a positive integer")),
    }
}

impl WeightArgs {
    fn source(self) -> WeightSource {
        match (self.power, self.weights_file) {
            (Some(alpha), _) => WeightSource::Power(alpha),
            (_, Some(path)) => WeightSource::File(path),
            _ => WeightSource::Unit,
        }
    }
}

fn first_line(text: &str) -> String {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .unwrap_or("invalid arguments")
        .to_string()
}

/// Maps `argv` (program name first) to a config. Unknown flags, missing or
/// conflicting weight sources and out-of-range numbers are rejected here.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, ArgsOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return Err(match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    ArgsOutcome::Info(e.render().to_string())
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    ArgsOutcome::Usage("error: a subcommand is required (see --help)".into())
                }
                _ => ArgsOutcome::Usage(first_line(&e.render().to_string())),
            });
        }
    };
    let (task, common, default_format) = match cli.command {
        Command::Constants {
            weights,
            horizon,
            common,
        } => {
            if horizon == Some(0) {
                return Err(ArgsOutcome::Usage(
                    "error: --horizon must be at least 1".into(),
                ));
            }
            let weights = weights.source();
            if horizon.is_none() && !matches!(weights, WeightSource::File(_)) {
                return Err(ArgsOutcome::Usage(
                    "error: --horizon is required with --power or --unit".into(),
                ));
            }
            (Task::Constants { weights, horizon }, common, Format::Json)
        }
        Command::Verify {
            weights,
            terms_file,
            constant,
            common,
        } => (
            Task::Verify {
                weights: weights.source(),
                terms_file,
                constant: constant.unwrap_or(std::f64::consts::E),
            },
            common,
            Format::Json,
        ),
        Command::Extremal { weights, n, common } => {
            let tol = common.tol.unwrap_or(DEFAULT_TOL);
            (
                Task::Extremal {
                    weights: weights.source(),
                    n,
                    tol,
                },
                common,
                Format::Json,
            )
        }
        Command::Norm {
            weights,
            p,
            n,
            iters,
            restarts,
            common,
        } => {
            let tol = common.tol.unwrap_or(NormOptions::default().tol);
            let task = Task::Norm {
                weights: weights.source(),
                n,
                p,
                iters,
                tol,
                restarts,
            };
            (task, common, Format::Json)
        }
        Command::Bennett {
            alpha_min,
            alpha_max,
            alpha_step,
            n_max,
            x_samples,
            common,
        } => {
            if alpha_max < alpha_min {
                return Err(ArgsOutcome::Usage(
                    "error: --alpha-max is below --alpha-min".into(),
                ));
            }
            let task = Task::Bennett {
                alpha_min,
                alpha_max,
                alpha_step,
                n_max,
                x_samples,
            };
            (task, common, Format::Csv)
        }
        Command::Lemma { n, r, common } => (Task::Lemma { n, r }, common, Format::Json),
    };
    Ok(RunConfig {
        task,
        format: common.format.unwrap_or(default_format),
        out: common.out,
        jobs: common.jobs,
    })
}

/// A failed run, tagged with its exit code.
#[derive(Debug, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BracketFailure { .. }
            | Error::NoConvergence { .. }
            | Error::DivergedTrace { .. }
            | Error::TraceLength { .. }
            | Error::ZeroTerm { .. }
            | Error::InvalidMu(_)
            | Error::ChainViolation { .. } => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

/// Materializes `len` weights for generators; files are read whole and
/// must hold at least `len` weights when `len` is given.
fn load_weights(source: &WeightSource, len: Option<usize>) -> Result<WeightSequence, Failure> {
    let seq = match source {
        WeightSource::Power(alpha) => {
            WeightSequence::power(*alpha, len.expect("length for generated weights"))?
        }
        WeightSource::Unit => WeightSequence::constant(len.expect("length for generated weights"))?,
        WeightSource::File(path) => {
            let seq = WeightSequence::parse(&read(path)?)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            match len {
                Some(n) if seq.len() < n => {
                    return Err(Failure::usage(format!(
                        "{} holds {} weights, {n} needed",
                        path.display(),
                        seq.len()
                    )))
                }
                _ => seq,
            }
        }
    };
    Ok(seq)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn csv_row(table: &mut csv::Writer<Vec<u8>>, fields: &[String]) {
    table.write_record(fields).expect("in-memory write");
}

/// Shortest round-trip form, with an exponent for very large or small values.
fn num(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite")
    } else {
        x.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Serialize)]
struct BennettJson {
    #[serde(flatten)]
    row: BennettRow,
    implied_constant: f64,
}

#[derive(Serialize)]
struct LemmaJson {
    n: usize,
    r: f64,
    lower: f64,
    exact: f64,
    upper: f64,
    holds: bool,
}

fn report(config: &RunConfig) -> Result<String, Failure> {
    let csv = config.format == Format::Csv;
    let mut table = csv::Writer::from_writer(Vec::new());
    let mut out = String::new();
    match &config.task {
        Task::Constants { weights, horizon } => {
            let (seq, horizon) = match (weights, horizon) {
                (WeightSource::File(_), h) => {
                    let seq = load_weights(weights, h.map(|h| h + 1))?;
                    let h = h.unwrap_or(seq.len() - 1);
                    if h == 0 {
                        return Err(Failure::usage("a weights file needs at least 2 weights"));
                    }
                    (seq, h)
                }
                (_, Some(h)) => (load_weights(weights, Some(h + 1))?, *h),
                (_, None) => unreachable!("checked in parse_args"),
            };
            let cmp = compare_m_l(&WeightProfile::new(seq), horizon)?;
            if csv {
                csv_row(&mut table, &["n".into(), "L_term".into(), "M_term".into()]);
                for (i, (l, m)) in cmp.l.terms.iter().zip(&cmp.m.terms).enumerate() {
                    csv_row(&mut table, &[(i + 1).to_string(), num(*l), num(*m)]);
                }
            } else {
                out = json(&cmp);
            }
        }
        Task::Verify {
            weights,
            terms_file,
            constant,
        } => {
            let terms = TermSequence::parse(&read(terms_file)?)
                .map_err(|e| Failure::usage(format!("{}: {e}", terms_file.display())))?;
            let seq = load_weights(weights, Some(terms.len()))?.truncated(terms.len())?;
            let r = verify_inequality(&terms, &WeightProfile::new(seq), *constant)?;
            if csv {
                csv_row(
                    &mut table,
                    &["lhs", "rhs_factor", "constant", "ratio", "holds"].map(String::from),
                );
                csv_row(
                    &mut table,
                    &[
                        num(r.lhs),
                        num(r.rhs_factor),
                        num(r.constant),
                        opt(r.ratio),
                        r.holds.to_string(),
                    ],
                );
            } else {
                out = json(&r);
            }
        }
        Task::Extremal { weights, n, tol } => {
            // one spare weight tightens the initial bracket when available
            let seq = match weights {
                WeightSource::File(_) => load_weights(weights, Some(*n))?,
                _ => load_weights(weights, Some(n + 1))?,
            };
            let s = solve_mu_n(&WeightProfile::new(seq), *n, *tol)?;
            if csv {
                csv_row(&mut table, &["k", "a_k", "omega_k"].map(String::from));
                for (k, a) in s.a.values().iter().enumerate() {
                    csv_row(
                        &mut table,
                        &[(k + 1).to_string(), num(*a), opt(s.omegas.get(k).copied())],
                    );
                }
            } else {
                out = json(&s);
            }
        }
        Task::Norm {
            weights,
            n,
            p,
            iters,
            tol,
            restarts,
        } => {
            let seq = load_weights(weights, Some(*n))?;
            let opts = NormOptions {
                max_iters: *iters,
                tol: *tol,
                restarts: *restarts,
            };
            let e = estimate_norm_lp_with(&WeightProfile::new(seq), *n, *p, &opts)?;
            if csv {
                let header = [
                    "p",
                    "N",
                    "lower_bound",
                    "cartlidge_upper",
                    "iterations",
                    "converged",
                    "monotonicity_warnings",
                ];
                csv_row(&mut table, &header.map(String::from));
                csv_row(
                    &mut table,
                    &[
                        num(e.p),
                        e.n.to_string(),
                        num(e.lower_bound),
                        opt(e.cartlidge_upper),
                        e.iterations.to_string(),
                        e.converged.to_string(),
                        e.monotonicity_warnings.to_string(),
                    ],
                );
            } else {
                out = json(&e);
            }
        }
        Task::Bennett {
            alpha_min,
            alpha_max,
            alpha_step,
            n_max,
            x_samples,
        } => {
            let grid = alpha_grid(*alpha_min, *alpha_max, *alpha_step)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(config.jobs)
                .build()
                .map_err(|e| Failure::usage(format!("cannot start workers: {e}")))?;
            let rows = pool.install(|| {
                grid.par_iter()
                    .map(|&a| bennett_row(a, *n_max, *x_samples))
                    .collect::<Result<Vec<_>, _>>()
            })?;
            if csv {
                let header = [
                    "alpha",
                    "n_max",
                    "max_term",
                    "bound",
                    "margin",
                    "f_min",
                    "implied_constant",
                ];
                csv_row(&mut table, &header.map(String::from));
                for r in &rows {
                    csv_row(
                        &mut table,
                        &[
                            num(r.alpha),
                            r.n_max.to_string(),
                            num(r.max_term),
                            num(r.bound),
                            num(r.margin),
                            num(r.f_min),
                            num(r.implied_constant()),
                        ],
                    );
                }
            } else {
                let rows: Vec<_> = rows
                    .into_iter()
                    .map(|row| BennettJson {
                        implied_constant: row.implied_constant(),
                        row,
                    })
                    .collect();
                out = json(&rows);
            }
        }
        Task::Lemma { n, r } => {
            let b = lemma0_bounds(*n, *r)?;
            let row = LemmaJson {
                n: *n,
                r: *r,
                lower: b.lower,
                exact: b.exact,
                upper: b.upper,
                holds: b.holds(),
            };
            if csv {
                csv_row(
                    &mut table,
                    &["n", "r", "lower", "exact", "upper", "holds"].map(String::from),
                );
                csv_row(
                    &mut table,
                    &[
                        row.n.to_string(),
                        num(row.r),
                        num(row.lower),
                        num(row.exact),
                        num(row.upper),
                        row.holds.to_string(),
                    ],
                );
            } else {
                out = json(&row);
            }
        }
    }
    if csv {
        out =
            String::from_utf8(table.into_inner().expect("in-memory flush")).expect("ascii report");
    }
    Ok(out)
}

/// Runs one config, writing the report to `--out` or stdout and any
/// diagnostic to stderr. Returns the process exit code.
pub fn run(config: &RunConfig) -> i32 {
    let result = report(config).and_then(|text| match &config.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::usage(format!("cannot write report: {e}")))
        }
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
