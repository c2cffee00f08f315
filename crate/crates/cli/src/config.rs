//! Experiment configuration files.
//!
//! A config is a TOML document; every section and key is optional and falls
//! back to the default documented on its field. Unknown keys are rejected so
//! that typos fail loudly instead of silently running the default.
//!
//! ```toml
//! [distribution]
//! kind = "erlang"
//! params = { shape = 3, rate = 1.0 }
//!
//! [[policies]]
//! kind = "optimal"
//!
//! [[policies]]
//! kind = "fixed"
//! theta = 1.5
//!
//! [sweep]
//! min = 0.05
//! max = 15.0
//! count = 300
//! spacing = "linear"
//!
//! [simulation]
//! peaks = 10000
//! replications = 10
//! seed = 1
//! ```

use std::path::{Path, PathBuf};

use paoi_core::optimizer::{SearchOptions, DEFAULT_GRID_POINTS};
use paoi_core::simulator::{SimulationOptions, DEFAULT_STALL_LIMIT};
use paoi_core::{
    Execution, Policy, SearchWindow, ServiceDistribution, ThresholdSampler, ThresholdSequence,
};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Service-time law. Default: `exponential` with `rate = 1`.
    pub distribution: ServiceDistribution,
    /// Policies to evaluate or simulate. Default: zero-wait, median, optimal.
    pub policies: Vec<PolicySpec>,
    pub sweep: SweepConfig,
    pub simulation: SimulationConfig,
    pub optimizer: OptimizerConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            distribution: ServiceDistribution::Exponential { rate: 1.0 },
            policies: vec![
                PolicySpec::ZeroWait,
                PolicySpec::Median,
                PolicySpec::Optimal,
            ],
            sweep: SweepConfig::default(),
            simulation: SimulationConfig::default(),
            optimizer: OptimizerConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// One entry of `[[policies]]`, selected by `kind`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    Fixed {
        theta: f64,
    },
    ZeroWait,
    Xmin,
    Median,
    /// The optimal fixed threshold over the optimizer window.
    Optimal,
    /// Thresholds for attempts 1, 2, ...; the last one repeats.
    Repetitive {
        thresholds: Vec<f64>,
    },
    /// I.i.d. thresholds drawn per request (simulation only).
    Randomized {
        sampler: ThresholdSampler,
    },
}

impl PolicySpec {
    pub fn label(&self) -> String {
        match self {
            PolicySpec::Fixed { theta } => format!("fixed-{theta}"),
            PolicySpec::ZeroWait => "zero-wait".into(),
            PolicySpec::Xmin => "xmin".into(),
            PolicySpec::Median => "median".into(),
            PolicySpec::Optimal => "optimal".into(),
            PolicySpec::Repetitive { .. } => "repetitive".into(),
            PolicySpec::Randomized { sampler } => format!("randomized-{}", sampler.label()),
        }
    }

    /// The core policy; `optimal` becomes a fixed threshold at `theta_dagger`.
    pub fn to_policy(&self, theta_dagger: impl FnOnce() -> Result<f64>) -> Result<Policy> {
        let policy = match self {
            PolicySpec::Fixed { theta } => Policy::FixedThreshold(*theta),
            PolicySpec::ZeroWait => Policy::ZeroWait,
            PolicySpec::Xmin => Policy::XMinThreshold,
            PolicySpec::Median => Policy::MedianThreshold,
            PolicySpec::Optimal => Policy::FixedThreshold(theta_dagger()?),
            PolicySpec::Repetitive { thresholds } => {
                Policy::RepetitiveSequence(ThresholdSequence::new(thresholds.clone())?)
            }
            PolicySpec::Randomized { sampler } => Policy::RandomizedThreshold(sampler.clone()),
        };
        policy.validate()?;
        Ok(policy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Smallest θ. Default: the optimizer window's `theta_min`.
    pub min: Option<f64>,
    /// Largest θ. Default: the optimizer window's `theta_max`.
    pub max: Option<f64>,
    /// Number of θ values including both ends. Default: 200.
    pub count: usize,
    /// `linear` (default) or `log`.
    pub spacing: Spacing,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            min: None,
            max: None,
            count: 200,
            spacing: Spacing::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    /// Peaks per replication. Default: 10000.
    pub peaks: usize,
    /// Independent replications, seeded `seed + r`. Default: 10.
    pub replications: usize,
    /// Base seed; `--seed` overrides it. Default: 1.
    pub seed: u64,
    /// Leading peaks discarded per replication. Default: 0.
    pub warmup: usize,
    /// Consecutive preemptions after which a run counts as stalled. Default: 10⁹.
    /// Constant thresholds met with probability below 1% skip their
    /// preempted attempts in one exact step and are not subject to it.
    pub stall_limit: u64,
    /// Also write every peak of replication 0. Default: false.
    pub export_peaks: bool,
    /// Also write the age sawtooth of replication 0 up to this time. Default: off.
    pub trajectory_horizon: Option<f64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            peaks: 10_000,
            replications: 10,
            seed: 1,
            warmup: 0,
            stall_limit: DEFAULT_STALL_LIMIT,
            export_peaks: false,
            trajectory_horizon: None,
        }
    }
}

impl SimulationConfig {
    pub fn options(&self) -> SimulationOptions {
        SimulationOptions {
            warmup: self.warmup,
            stall_limit: self.stall_limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Default: just above the support minimum.
    pub theta_min: Option<f64>,
    /// Default: the `1 − 10⁻⁶` quantile.
    pub theta_max: Option<f64>,
    /// Refinement tolerance on θ. Default: `1e-8 · (theta_max − theta_min)`.
    pub tol: Option<f64>,
    /// Grid points scanned before refinement. Default: 2000.
    pub grid: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            theta_min: None,
            theta_max: None,
            tol: None,
            grid: DEFAULT_GRID_POINTS,
        }
    }
}

impl OptimizerConfig {
    pub fn window(&self, d: &ServiceDistribution) -> SearchWindow {
        let default = SearchWindow::default_for(d);
        SearchWindow::new(
            self.theta_min.unwrap_or(default.theta_min),
            self.theta_max.unwrap_or(default.theta_max),
        )
    }

    pub fn options(&self) -> SearchOptions {
        SearchOptions {
            grid_points: self.grid,
            tol: self.tol,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; `--out` overrides it. Default: `results`.
    pub dir: PathBuf,
    /// Prepended to every output file name. Default: empty.
    pub prefix: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
            prefix: String::new(),
        }
    }
}

impl OutputConfig {
    pub fn file(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{}{name}", self.prefix))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::ParseConfig {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        if self.policies.is_empty() {
            return Err(CliError::Config("at least one policy is required".into()));
        }
        if self.sweep.count < 2 {
            return Err(CliError::Config("sweep.count must be at least 2".into()));
        }
        if self.optimizer.grid < 2 {
            return Err(CliError::Config("optimizer.grid must be at least 2".into()));
        }
        if self.simulation.peaks < 2 || self.simulation.replications == 0 {
            return Err(CliError::Config(
                "simulation needs at least 2 peaks and 1 replication".into(),
            ));
        }
        if let Some(h) = self.simulation.trajectory_horizon {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::Config(format!(
                    "simulation.trajectory_horizon must be positive, got {h}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml(text, Path::new("test.toml"))
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn full_file_round_trips() {
        let c = parse(
            r#"
            policies = [
                { kind = "fixed", theta = 1.5 },
                { kind = "randomized", sampler = { kind = "uniform", low = 1.0, high = 2.0 } },
                { kind = "repetitive", thresholds = [2.0, 1.0] },
            ]
            [distribution]
            kind = "erlang"
            params = { shape = 3, rate = 1 }
            [sweep]
            min = 0.05
            max = 15.0
            count = 30
            spacing = "log"
            [simulation]
            peaks = 500
            seed = 9
            export_peaks = true
            [optimizer]
            theta_min = 0.1
            [output]
            dir = "out"
            prefix = "erlang3-"
            "#,
        )
        .unwrap();
        assert_eq!(c.distribution, ServiceDistribution::erlang(3, 1.0).unwrap());
        assert_eq!(c.policies.len(), 3);
        assert_eq!(c.sweep.spacing, Spacing::Log);
        assert_eq!(c.simulation.replications, 10);
        assert_eq!(
            c.output.file("sweep.csv"),
            PathBuf::from("out/erlang3-sweep.csv")
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            parse("[simulation]\npeak = 10\n"),
            Err(CliError::ParseConfig { .. })
        ));
        assert!(parse("[distribution]\nkind = \"exponential\"\nparams = { rat = 1.0 }\n").is_err());
        assert!(parse("[[policies]]\nkind = \"fixed\"\ntheta = 1\nextra = 2\n").is_err());
    }

    #[test]
    fn invalid_parameters_are_config_errors() {
        let err = parse("[distribution]\nkind = \"pareto\"\nparams = { xm = 1.0, alpha = -2.0 }\n")
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
