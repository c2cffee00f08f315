use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The conditioning event `X > θ` has probability zero.
    #[error("conditioning event X > {theta} has probability zero")]
    DegenerateCondition { theta: f64 },

    #[error("invalid threshold sequence: {0}")]
    InvalidSequence(String),

    /// Every threshold in the tail lies below the support, so no update is
    /// ever delivered and the series does not contract.
    #[error("threshold series does not contract: {0}")]
    SeriesDiverged(String),

    #[error("policy `{0}` has no analytic form; simulate it instead")]
    NoAnalyticForm(String),

    #[error("invalid search window [{theta_min}, {theta_max}]: {reason}")]
    InvalidWindow {
        theta_min: f64,
        theta_max: f64,
        reason: String,
    },

    /// `F̄(θ_min) = 1`: the Bellman operator is not a contraction.
    #[error("Bellman operator is not a contraction: survival at theta_min = {survival}")]
    NoContraction { survival: f64 },

    #[error(
        "value iteration did not converge after {iterations} sweeps (last change {last_change:e})"
    )]
    NotConverged { iterations: usize, last_change: f64 },

    #[error("simulation stalled: {preemptions} consecutive preemptions without a reception")]
    SimulationStall { preemptions: u64 },

    #[error("invalid sampler: {0}")]
    InvalidSampler(String),

    #[error("need at least {needed} peaks, got {got}")]
    TooFewPeaks { needed: usize, got: usize },
}
