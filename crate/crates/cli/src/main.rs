//! `linclass`: generate datasets, train linear classifiers, pick
//! regularization parameters and export decision boundaries.
//!
//! Exit codes: 0 success, 2 usage or I/O error, 3 training did not converge
//! (artifacts are still written), 4 a regularization rule failed.

mod boundary;
mod data;
mod run;
mod select;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use linclass::datagen::{self, NoiseSpec};
use linclass::regsel::{self, TikhonovProblem};
use linclass::{Dataset, LinearModel};
use serde::Serialize;

use data::DataArgs;
use run::{Algo, TrainArgs};
use select::RegArgs;

/// Invalid combination of otherwise well-formed arguments.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

const EXIT_USAGE: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_SELECTION: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "linclass",
    version,
    about = "Linear classifiers: least squares, perceptron, WINNOW and Tikhonov parameter choice"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset or field
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Fit one model; writes model.json and report.json into --out
    #[command(allow_negative_numbers = true)]
    Train {
        #[arg(long, value_enum)]
        algo: Algo,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        train: TrainArgs,
        #[command(flatten)]
        reg: RegArgs,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Also write history.csv (iteration, loss, misclassified_count)
        #[arg(long)]
        history: bool,
    },
    /// Choose a regularization parameter
    #[command(name = "select-gamma", allow_negative_numbers = true)]
    SelectGamma {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_parser = run::parse_basis)]
        basis: Option<linclass::BasisSpec>,
        #[command(flatten)]
        reg: RegArgs,
        /// Balancing stabilization tolerance
        #[arg(long, default_value_t = 1e-3)]
        theta: f64,
        /// Write (gamma, F, phi_bar, psi_bar) rows over [gamma-lo, gamma-hi]
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trace_points: usize,
        /// Selection JSON (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the decision boundary of a two-dimensional model as CSV
    #[command(allow_negative_numbers = true)]
    Boundary {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        x_min: f64,
        #[arg(long)]
        x_max: f64,
        /// Number of x1 samples for quadratic models
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Output CSV (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train several algorithms on one dataset and tabulate the results
    #[command(allow_negative_numbers = true)]
    Compare {
        /// Comma-separated algorithms, at least two
        #[arg(long, value_enum, value_delimiter = ',', required = true)]
        algos: Vec<Algo>,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        train: TrainArgs,
        #[command(flatten)]
        reg: RegArgs,
        /// Boundary x range (default: range of the first feature)
        #[arg(long)]
        x_min: Option<f64>,
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum GenKind {
    /// Two classes on either side of y = 1.2 - 0.5x
    #[command(allow_negative_numbers = true)]
    Linear {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = -2.0)]
        x_lo: f64,
        #[arg(long, default_value_t = 2.0)]
        x_hi: f64,
        /// Multiplicative noise level in [0, 1]
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Amplitude of the vertical scatter
        #[arg(long, default_value_t = datagen::DEFAULT_JITTER)]
        jitter: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Disk (class 1) inside a ring (class 0)
    Circle {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        r_inner: f64,
        #[arg(long, default_value_t = 3.0)]
        r_outer: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two overlapping Gaussian clouds
    #[command(allow_negative_numbers = true)]
    Gaussian {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        separation: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every boolean vector of the given length; the label copies one attribute
    Boolean {
        #[arg(long, default_value_t = 6)]
        attrs: usize,
        /// 0-based index of the attribute copied into the label
        #[arg(long, default_value_t = 0)]
        target: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Radial bump field on an n×n grid of the unit square (no header)
    #[command(allow_negative_numbers = true)]
    Field {
        #[arg(long, default_value_t = 21)]
        n: usize,
        #[arg(long, default_value_t = 8.0)]
        peak: f64,
        #[arg(long, default_value_t = 0.4)]
        width: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

macro_rules! say {
    ($($t:tt)*) => {
        writeln!(io::stdout(), $($t)*)?
    };
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<io::Error>())
        .any(|c| c.kind() == io::ErrorKind::BrokenPipe)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    use linclass::Error as E;
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<E>() {
            return match err {
                E::BracketInvalid { .. } | E::DegenerateIterate { .. } => EXIT_SELECTION,
                E::RankDeficient | E::NotPositiveDefinite { .. } => EXIT_NOT_CONVERGED,
                _ => EXIT_USAGE,
            };
        }
    }
    EXIT_USAGE
}

fn execute(command: Command) -> Result<u8> {
    match command {
        Command::Gen { kind } => gen(kind),
        Command::Train {
            algo,
            data,
            train,
            reg,
            out,
            history,
        } => {
            let ds = data.load()?;
            let outcome = run::run(algo, &train, &reg, &ds)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            write_json(&out.join("model.json"), &outcome.model)?;
            write_json(&out.join("report.json"), &outcome.report)?;
            if let (true, Some(tr)) = (history, &outcome.training) {
                write_file(&out.join("history.csv"), |w| Ok(tr.write_history_csv(w)?))?;
            }
            let r = &outcome.report;
            say!(
                "{}: converged={} iterations={} misclassified={} stop={}",
                algo.name(),
                r.converged,
                r.iterations,
                r.misclassified,
                r.stop_reason
            );
            Ok(if r.converged { 0 } else { EXIT_NOT_CONVERGED })
        }
        Command::SelectGamma {
            data,
            basis,
            reg,
            theta,
            trace,
            trace_points,
            out,
        } => {
            let ds = if data.data.is_some() || data.field.is_some() {
                Some(data.load()?)
            } else {
                None
            };
            let design = match &ds {
                Some(ds) => Some(ds.design(basis.unwrap_or_else(|| data::default_basis(ds)))?),
                None => None,
            };
            let t = ds.as_ref().map(Dataset::targets_f64).unwrap_or_default();
            let problem = match &design {
                Some(d) => Some(TikhonovProblem::new(d, &t, None)?),
                None => None,
            };
            if let Some(path) = &trace {
                let Some(p) = &problem else {
                    bail!(UsageError("--trace needs --data or --field".into()));
                };
                let points = regsel::trace(p, &regsel::log_grid(reg.gamma_lo, reg.gamma_hi, trace_points))?;
                write_file(path, |w| Ok(regsel::write_trace_csv(&points, w)?))?;
            }
            let sel = select::select(&reg, theta, problem.as_ref())?;
            match &out {
                Some(path) => write_json(path, &sel)?,
                None => say!("{}", serde_json::to_string_pretty(&sel)?),
            }
            Ok(0)
        }
        Command::Boundary {
            model,
            x_min,
            x_max,
            samples,
            out,
        } => {
            let text = fs::read_to_string(&model).with_context(|| format!("reading {}", model.display()))?;
            let m: LinearModel = serde_json::from_str(&text).with_context(|| format!("parsing {}", model.display()))?;
            let m = LinearModel::new(m.basis, m.weights.clone(), m.gamma, m.threshold)?.with_rule(m.rule);
            match &out {
                Some(path) => write_file(path, |w| {
                    boundary::write_boundary(&m, x_min, x_max, samples, w).map(drop)
                })?,
                None => {
                    boundary::write_boundary(&m, x_min, x_max, samples, io::stdout().lock())?;
                }
            }
            Ok(0)
        }
        Command::Compare {
            algos,
            data,
            train,
            reg,
            x_min,
            x_max,
            samples,
            out,
        } => compare(&algos, &data, &train, &reg, (x_min, x_max), samples, &out),
    }
}

fn gen(kind: GenKind) -> Result<u8> {
    let (ds, seed, out) = match kind {
        GenKind::Linear {
            n,
            x_lo,
            x_hi,
            delta,
            jitter,
            seed,
            out,
        } => {
            let noise = NoiseSpec::new(delta, seed)?;
            let ds = datagen::gen_linear_two_class_with_jitter(n, x_lo, x_hi, &noise, jitter)?;
            (ds, Some(seed), out)
        }
        GenKind::Circle {
            n,
            r_inner,
            r_outer,
            seed,
            out,
        } => (
            datagen::gen_circle_two_class(n, r_inner, r_outer, seed)?,
            Some(seed),
            out,
        ),
        GenKind::Gaussian {
            n,
            separation,
            sigma,
            seed,
            out,
        } => (
            datagen::gen_gaussian_two_class(n, separation, sigma, seed)?,
            Some(seed),
            out,
        ),
        GenKind::Boolean { attrs, target, out } => (datagen::gen_boolean(attrs, target)?, None, out),
        GenKind::Field { n, peak, width, out } => {
            let grid = datagen::gen_bump_field(n, peak, width)?;
            match &out {
                Some(path) => {
                    write_file(path, |w| Ok(datagen::write_field_csv(&grid, w)?))?;
                    say!("grid={n}x{n}");
                }
                None => {
                    let mut buf = Vec::new();
                    datagen::write_field_csv(&grid, &mut buf)?;
                    io::stdout().write_all(&buf)?;
                }
            }
            return Ok(0);
        }
    };
    let (zeros, ones) = ds.class_counts();
    let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    let summary = format!("seed={seed} rows={} class0={zeros} class1={ones}", ds.len());
    match &out {
        Some(path) => {
            write_file(path, |w| Ok(ds.write_csv(w)?))?;
            say!("{summary}");
        }
        None => {
            let mut buf = Vec::new();
            ds.write_csv(&mut buf)?;
            io::stdout().write_all(&buf)?;
            eprintln!("{summary}");
        }
    }
    Ok(0)
}

struct SummaryRow {
    algo: &'static str,
    converged: bool,
    iterations: Option<u64>,
    misclassified: Option<usize>,
    stop_reason: String,
    weights: String,
}

fn compare(
    algos: &[Algo],
    data: &DataArgs,
    train: &TrainArgs,
    reg: &RegArgs,
    x_range: (Option<f64>, Option<f64>),
    samples: usize,
    out: &Path,
) -> Result<u8> {
    if algos.len() < 2 {
        bail!(UsageError("compare needs at least two algorithms".into()));
    }
    for (i, a) in algos.iter().enumerate() {
        if algos[..i].contains(a) {
            bail!(UsageError(format!("algorithm {} listed twice", a.name())));
        }
    }
    let ds = data.load()?;
    let x1 = ds.features.column(0);
    let x_min = x_range
        .0
        .unwrap_or_else(|| x1.iter().copied().fold(f64::INFINITY, f64::min));
    let x_max = x_range
        .1
        .unwrap_or_else(|| x1.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let mut rows = Vec::with_capacity(algos.len());
    for &algo in algos {
        let row = match run::run(algo, train, reg, &ds) {
            Ok(outcome) => {
                write_json(&out.join(format!("model_{}.json", algo.name())), &outcome.model)?;
                if outcome.model.basis.raw_dim() == 2 && x_min < x_max {
                    let path = out.join(format!("boundary_{}.csv", algo.name()));
                    write_file(&path, |w| {
                        boundary::write_boundary(&outcome.model, x_min, x_max, samples, w).map(drop)
                    })?;
                }
                let r = outcome.report;
                let weights: Vec<String> = outcome.model.weights.iter().map(f64::to_string).collect();
                SummaryRow {
                    algo: algo.name(),
                    converged: r.converged,
                    iterations: Some(r.iterations),
                    misclassified: Some(r.misclassified),
                    stop_reason: r.stop_reason,
                    weights: weights.join(" "),
                }
            }
            Err(e) => {
                log::warn!("{} failed: {e:#}", algo.name());
                SummaryRow {
                    algo: algo.name(),
                    converged: false,
                    iterations: None,
                    misclassified: None,
                    stop_reason: format!("error: {e:#}").replace(',', ";"),
                    weights: String::new(),
                }
            }
        };
        say!("{}: converged={} stop={}", row.algo, row.converged, row.stop_reason);
        rows.push(row);
    }
    write_file(&out.join("summary.csv"), |w| {
        writeln!(w, "algo,converged,iterations,misclassified,stop_reason,weights")?;
        for r in &rows {
            let opt = |v: Option<String>| v.unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.algo,
                r.converged,
                opt(r.iterations.map(|v| v.to_string())),
                opt(r.misclassified.map(|v| v.to_string())),
                r.stop_reason,
                r.weights
            )?;
        }
        Ok(())
    })?;
    Ok(0)
}

fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}
