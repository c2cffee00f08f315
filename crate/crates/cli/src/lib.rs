//! `paoi-lab`: configuration-driven peak age-of-information experiments.
//!
//! Commands read an [`ExperimentConfig`](config::ExperimentConfig) from a
//! TOML file, print a short report and write CSV files under the output
//! directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod reproduce;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::reproduce::Figure;

/// Environment variable capping the worker threads (0 = automatic).
pub const THREADS_ENV: &str = "PAOI_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "paoi-lab",
    version,
    about = "Peak age-of-information experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (TOML). Without it every setting takes its default.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `simulation.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form PAoI of every configured policy.
    Eval,
    /// PAoI of the fixed-threshold policy over a range of thresholds.
    Sweep,
    /// Optimal threshold, minimum achievable PAoI and Bellman cross-check.
    Optimize,
    /// Monte-Carlo replications of every configured policy.
    Simulate,
    /// Whether preemptions can beat the zero-wait policy.
    Check,
    /// Data bundle for one of the evaluation figures.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
}

/// Loads the config and applies the command-line overrides.
pub fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.simulation.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output.dir = out.clone();
    }
    Ok(config)
}

/// Applies `PAOI_THREADS` to the global worker pool.
pub fn configure_threads(value: Option<&str>) -> Result<()> {
    let Some(raw) = value else { return Ok(()) };
    let threads: usize = raw.trim().parse().map_err(|_| {
        CliError::Config(format!(
            "{THREADS_ENV} must be a nonnegative integer, got {raw:?}"
        ))
    })?;
    if threads > 0 {
        paoi_core::par::configure_threads(threads);
    }
    Ok(())
}

/// Runs one command and returns the report to print.
pub fn run(cli: &Cli) -> Result<String> {
    configure_threads(std::env::var(THREADS_ENV).ok().as_deref())?;
    let config = load_config(cli)?;
    let report = match &cli.command {
        Command::Eval => commands::eval(&config)?.report,
        Command::Sweep => commands::sweep(&config)?.report,
        Command::Optimize => commands::optimize(&config)?.report,
        Command::Simulate => commands::simulate(&config)?.report,
        Command::Check => commands::check(&config)?.report,
        Command::Reproduce { figure } => reproduce::reproduce(*figure, &config.output)?.report,
    };
    Ok(report)
}
