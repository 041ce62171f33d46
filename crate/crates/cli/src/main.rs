//! `qrac`: validate measurements, compute optimal QRAC success
//! probabilities, detect incompatibility and scan noise regions.
//!
//! Exit codes: 0 success or incompatibility detected, 1 domain error,
//! 2 parse or usage error, 3 inconclusive or no certificate, 4 test vacuous.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qrac_core::error::Error;

use crate::render::Format;

#[derive(Debug, Parser)]
#[command(
    name = "qrac",
    version,
    about = "Quantum random access codes and measurement incompatibility"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Override a tolerance, e.g. `--tol guard=1e-9`. Names: hermitian,
    /// povm, guard, region, golden, oracle.
    #[arg(long = "tol", value_name = "NAME=VALUE", global = true)]
    pub tol: Vec<String>,
    /// Seed for `random:` built-ins.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    pub format: Format,
    /// Fractional digits in human and csv output.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u8).range(1..=17), global = true)]
    pub precision: u8,
    /// Output file (scan CSV, oracle joint, or the report itself).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check positivity and completeness of a measurement.
    Validate {
        /// POVM file or built-in name.
        measurement: String,
    },
    /// Optimal success probability of a pair and the applicable bounds.
    Success(PairArgs),
    /// Incompatibility test with degree and robustness bounds.
    Detect(PairArgs),
    /// Classify a grid of noisy mutually unbiased pairs.
    Scan {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = qrac_core::scan::DEFAULT_GRID_STEPS)]
        steps: usize,
    },
    /// Reproduce the reference success probabilities.
    Examples {
        /// Mix every measurement with uniform noise of weight `1 − t`.
        #[arg(long, value_name = "T")]
        noise: Option<f64>,
    },
    /// Search for a joint measurement.
    Oracle {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = qrac_core::oracle::DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// List the built-in measurement names.
    Builtins,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// POVM file or built-in name; a pair built-in may stand alone.
    pub first: String,
    pub second: Option<String>,
}

/// Failure carried to the exit code.
#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(Error::Parse(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(s) => write!(f, "{s}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
