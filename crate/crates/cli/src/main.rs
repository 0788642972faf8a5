//! `semo` — experiment command line for the noisy one-min-max archive-search
//! simulators: single runs, sweeps, scaling fits and the validation suite.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 validation
/// failure.
pub const EXIT_IO: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "semo",
    version,
    about = "Archive-based Pareto search on the one-min-max benchmark under one-bit noise",
    long_about = "Archive-based Pareto search on the one-min-max benchmark under one-bit \
                  evaluation noise.\n\nNoise rates accept either a number or a rule evaluated \
                  per problem size: 'c/n', 'c/n2' and 'clogn/n2' mean c/n, c/n^2 and \
                  c*ln(n)/n^2. Logarithms are natural everywhere, including the iteration \
                  budget ceil(m * n^2 * ln n) set through --budget-multiple."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one cell (one or more seeded trials of a single configuration).
    Run(RunArgs),
    /// Run a grid of cells from a config file and/or flags.
    Sweep(SweepArgs),
    /// Fit a power law to per-size medians from a sweep's record file.
    Fit(FitArgs),
    /// Run the invariant and distribution validation suite.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Problem size (number of bits).
    #[arg(long)]
    n: usize,
    /// Noise rate: a number or a rule like "0.25/n" or "4logn/n2".
    #[arg(long, default_value = "0")]
    p: String,
    /// Update rule: cached, reeval or keep.
    #[arg(long, default_value = "cached")]
    variant: String,
    /// Iteration limit for the keep variant: a number or "inf".
    #[arg(long)]
    k: Option<String>,
    /// Seeded trials to run.
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Iteration budget multiple m in ceil(m * n^2 * ln n).
    #[arg(long, default_value_t = 20.0)]
    budget_multiple: f64,
    /// Master seed; trial i uses a stream derived from (seed, i).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run a single trial on exactly this stream seed (replay of a recorded
    /// per-trial seed). Requires --trials 1.
    #[arg(long)]
    trial_seed: Option<u64>,
    /// Trace sampling: off, full or stride:S.
    #[arg(long, default_value = "off")]
    trace: String,
    /// Write records to this path.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Output format for --out: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct SweepArgs {
    /// Flat key-value config file; flags override its values.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// Comma-separated problem sizes, e.g. "32,64,128".
    #[arg(long)]
    n: Option<String>,
    /// Comma-separated noise rules, e.g. "0,0.25/n,4logn/n2".
    #[arg(long)]
    p: Option<String>,
    /// Comma-separated variants out of cached, reeval, keep[:K].
    #[arg(long)]
    variants: Option<String>,
    /// Trials per cell.
    #[arg(long)]
    trials: Option<u64>,
    /// Iteration budget multiple m in ceil(m * n^2 * ln n).
    #[arg(long)]
    budget_multiple: Option<f64>,
    /// Master seed for the whole sweep.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = default pool). Output bytes do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Censored-fraction threshold for flagging separation rows.
    #[arg(long)]
    separation_threshold: Option<f64>,
    /// Records CSV path.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Summary JSON path (default: records path with .summary.json).
    #[arg(long)]
    summary: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Records CSV produced by run or sweep.
    #[arg(long)]
    input: std::path::PathBuf,
    /// Variant to fit: cached, reeval or keep.
    #[arg(long)]
    variant: String,
    /// Noise rule to fit (needed when the file holds several).
    #[arg(long)]
    rule: Option<String>,
    /// Statistic: t-total, t-ex or evaluations.
    #[arg(long, default_value = "t-total")]
    stat: String,
    /// Regressor: logn (power of n) or n2logn (prefactor of n^2 ln n).
    #[arg(long, default_value = "logn")]
    regressor: String,
}

#[derive(Args)]
struct ValidateArgs {
    /// Smaller, faster suite.
    #[arg(long)]
    quick: bool,
    /// Seed for the suite's random streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Errors mapped to exit codes at the top level.
pub enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(EXIT_USAGE),
            CliError::Io(_) => ExitCode::from(EXIT_IO),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::run(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Fit(args) => commands::fit(args),
        Command::Validate(args) => commands::validate(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
