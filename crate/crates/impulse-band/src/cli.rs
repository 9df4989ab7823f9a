//! Argument parsing and dispatch for the `impulse-band` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use impulse_band_core::policy::Best;
use impulse_band_core::Regime;

use crate::commands::{self, Check, PolicyChoice, SolveOutput, VerifySettings};
use crate::config::ModelConfig;
use crate::error::{AppError, EXIT_INVALID_INPUT};
use crate::output::{self, DEFAULT_PRECISION};
use crate::simulate::SimConfig;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "IMPULSE_BAND_THREADS";

#[derive(Debug, Parser)]
#[command(name = "impulse-band", version, about = "Optimal ordering bands under a two-step setup cost")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve both band problems at one threshold and classify the regime.
    Solve(SolveArgs),
    /// Classify a range of thresholds and print one row per threshold.
    Table(TableArgs),
    /// Discounted cost of each candidate policy over a range of starting levels.
    Compare(CompareArgs),
    /// Run numerical checks on the solution; exits 4 when a check fails.
    Verify(VerifyArgs),
    /// Monte Carlo estimate of a policy's discounted cost.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Significant digits in CSV output.
    #[arg(long, default_value_t = DEFAULT_PRECISION, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..=17))]
    pub precision: usize,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Threshold `Q`; overrides the config file.
    #[arg(long)]
    pub q: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub q_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub q_max: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub q_step: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, default_value_t = -12.0, allow_negative_numbers = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckArg {
    Hjb,
    Gap,
    Quasiconvex,
    Oracle,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, value_enum, default_value = "all")]
    pub check: Vec<CheckArg>,
    /// Number of sampled pairs for the intervention check.
    #[arg(long, default_value_t = 10_000)]
    pub pairs: usize,
    /// Lattice step of the grid oracle.
    #[arg(long, default_value_t = 0.01)]
    pub oracle_step: f64,
    /// Grid points for the generator and quasi-convexity checks.
    #[arg(long, default_value_t = 2001)]
    pub grid_points: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    /// The capped band, or the band given by --reorder/--order-up-to.
    Band,
    /// The floored band.
    Band2,
    Generalized,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, value_enum, default_value = "band")]
    pub policy: PolicyArg,
    /// Explicit reorder level for `--policy band`.
    #[arg(long, allow_negative_numbers = true, requires = "order_up_to")]
    pub reorder: Option<f64>,
    /// Explicit order-up-to level for `--policy band`.
    #[arg(long, allow_negative_numbers = true, requires = "reorder")]
    pub order_up_to: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub x0: f64,
    #[arg(long, default_value_t = 20_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 40.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { EXIT_INVALID_INPUT } else { 0 };
        }
    };
    if let Err(err) = configure_threads() {
        eprintln!("error: {err}");
        return err.exit_code();
    }
    match run(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), AppError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| AppError::Invalid(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| AppError::Invalid(format!("cannot configure {threads} threads: {e}")))
}

fn emit(text: &str, path: Option<&PathBuf>) -> Result<(), AppError> {
    let result = match path {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    result.map_err(|source| AppError::Io {
        path: path.map_or_else(|| "stdout".to_string(), |p| p.display().to_string()),
        source,
    })
}

pub fn run(cli: &Cli) -> Result<(), AppError> {
    match &cli.command {
        Command::Solve(args) => {
            let cfg = ModelConfig::load(&args.config)?;
            let (_, report) = commands::solve(&cfg, args.q)?;
            let summary = SolveOutput::from(&report);
            let text = match args.out.format.unwrap_or(Format::Json) {
                Format::Json => output::json(&summary)?,
                Format::Csv => {
                    let regime = match report.regime {
                        Regime::S2Everywhere => "S2Everywhere",
                        Regime::S1PlusGeneralized => "S1PlusGeneralized",
                    };
                    let fields = [
                        ("Q", Some(summary.q)),
                        ("s1", Some(summary.s1)),
                        ("S1", Some(summary.big_s1)),
                        ("A1*", Some(summary.a1_star)),
                        ("s2", Some(summary.s2)),
                        ("S2", Some(summary.big_s2)),
                        ("A2*", Some(summary.a2_star)),
                        ("Sbar", summary.s_bar),
                        ("s_low", summary.s_low),
                        ("Xi", summary.xi),
                    ];
                    let body = output::record_csv(&fields, args.out.precision)?;
                    let mut lines = body.lines();
                    let header = lines.next().unwrap_or_default();
                    let values = lines.next().unwrap_or_default();
                    format!("{header},regime\n{values},{regime}\n")
                }
            };
            emit(&text, args.out.output.as_ref())
        }
        Command::Table(args) => {
            let cfg = ModelConfig::load(&args.config)?;
            let q_values = commands::q_grid(args.q_min, args.q_max, args.q_step)?;
            let sweep = commands::table(&cfg, &q_values)?;
            let text = match args.out.format.unwrap_or(Format::Csv) {
                Format::Csv => output::table_csv(&sweep, args.out.precision)?,
                Format::Json => output::json(&sweep)?,
            };
            emit(&text, args.out.output.as_ref())
        }
        Command::Compare(args) => {
            let cfg = ModelConfig::load(&args.config)?;
            let grid = commands::linspace(args.x_min, args.x_max, args.points)?;
            let (_, rows) = commands::compare(&cfg, args.q, &grid)?;
            let text = match args.out.format.unwrap_or(Format::Csv) {
                Format::Json => output::json(&rows)?,
                Format::Csv => {
                    let band1: Vec<_> = rows.iter().map(|r| (r.x, r.band1)).collect();
                    let band2: Vec<_> = rows.iter().map(|r| (r.x, r.band2)).collect();
                    let generalized: Vec<_> = rows.iter().filter_map(|r| r.generalized.map(|g| (r.x, g))).collect();
                    let mut curves = vec![(Best::Band1.as_str(), &band1[..]), (Best::Band2.as_str(), &band2[..])];
                    if !generalized.is_empty() {
                        curves.push((Best::Generalized.as_str(), &generalized[..]));
                    }
                    output::curves_csv(curves, args.out.precision)?
                }
            };
            emit(&text, args.out.output.as_ref())
        }
        Command::Verify(args) => {
            let cfg = ModelConfig::load(&args.config)?;
            let checks = if args.check.contains(&CheckArg::All) {
                vec![Check::Hjb, Check::Gap, Check::Quasiconvex, Check::Oracle]
            } else {
                let mut checks: Vec<Check> = args
                    .check
                    .iter()
                    .map(|c| match c {
                        CheckArg::Hjb => Check::Hjb,
                        CheckArg::Gap => Check::Gap,
                        CheckArg::Quasiconvex => Check::Quasiconvex,
                        _ => Check::Oracle,
                    })
                    .collect();
                checks.dedup();
                checks
            };
            let settings =
                VerifySettings { pairs: args.pairs, grid_points: args.grid_points, oracle_step: args.oracle_step };
            let reports = commands::verify(&cfg, args.q, &checks, settings)?;
            let text = output::json(&reports)?;
            emit(&text, args.output.as_ref())?;
            let failed = reports.iter().filter(|r| !r.pass).count();
            if failed > 0 {
                let names: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.check.as_str()).collect();
                return Err(AppError::ChecksFailed { failed, total: reports.len(), report: names.join(", ") });
            }
            Ok(())
        }
        Command::Simulate(args) => {
            let cfg = ModelConfig::load(&args.config)?;
            let model = cfg.model(args.q)?;
            let validation = model.validate();
            for v in &validation.violations {
                eprintln!("warning: {}: {}", v.assumption, v.detail);
            }
            let choice = match (args.policy, args.reorder, args.order_up_to) {
                (PolicyArg::Band, Some(reorder), Some(order_up_to)) => PolicyChoice::Band { reorder, order_up_to },
                (PolicyArg::Band, ..) => PolicyChoice::Band1,
                (PolicyArg::Band2, None, None) => PolicyChoice::Band2,
                (PolicyArg::Generalized, None, None) => PolicyChoice::Generalized,
                _ => return Err(AppError::Invalid("--reorder/--order-up-to only apply to --policy band".into())),
            };
            let sim = SimConfig { dt: args.dt, horizon: args.horizon, n_paths: args.paths, master_seed: args.seed };
            let result = commands::simulate(&cfg, args.q, choice, args.x0, &sim)?;
            emit(&output::json(&result)?, args.output.as_ref())
        }
    }
}
