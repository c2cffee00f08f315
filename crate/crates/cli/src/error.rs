use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by `paoi-lab`, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    ParseConfig { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] paoi_core::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for anything the configuration can fix, 3 for simulation failures,
    /// 1 for numerical or I/O failures.
    pub fn exit_code(&self) -> i32 {
        use paoi_core::Error as E;
        match self {
            CliError::ReadConfig { .. } | CliError::ParseConfig { .. } | CliError::Config(_) => 2,
            CliError::Core(
                E::InvalidParameter { .. }
                | E::InvalidWindow { .. }
                | E::InvalidSequence(_)
                | E::InvalidSampler(_)
                | E::SeriesDiverged(_)
                | E::NoContraction { .. }
                | E::DegenerateCondition { .. }
                | E::NoAnalyticForm(_),
            ) => 2,
            CliError::Core(E::SimulationStall { .. } | E::TooFewPeaks { .. }) => 3,
            CliError::Core(E::NotConverged { .. }) | CliError::Write { .. } | CliError::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
