//! Command-line front end.
//!
//! ```text
//! mimo-se {simulate|asymptotic|compare|optimize|sweep} --config FILE
//!         [--seed S] [--workers N] [--format csv|json] [--out PATH]
//! ```
//!
//! Flags override the corresponding config keys. The seed defaults to 0.
//! Exit status is 0 on success, 2 for configuration errors, 3 for numeric
//! failures and 1 when the output cannot be written.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use config::Format;

#[derive(Debug, Parser)]
#[command(
    name = "mimo-se",
    version,
    about = "Spectral efficiency of centralized and distributed massive MIMO"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base seed; defaults to the config value, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for Monte Carlo trials.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo estimate of the mean spectral efficiency.
    Simulate(Common),
    /// Every closed form that applies to the configured topology.
    Asymptotic(Common),
    /// Centralized versus distributed ordering at each reference distance.
    Compare(Common),
    /// Optimal antenna ring radius in a circular cell.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Cell radius in metres; taken from a circular config when absent.
        #[arg(long)]
        r_c_m: Option<f64>,
        /// Add a brute-force grid search at 0, 10 and 20 dB.
        #[arg(long)]
        sweep: bool,
    },
    /// Sweep one parameter as described by the config's `sweep` block.
    Sweep(Common),
}

/// Failure classes, each with its own exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numeric(m) | CliError::Io(m) => m,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        if e.is_configuration() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

/// Parses `std::env::args`, runs the command and maps the outcome to an exit
/// status.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
