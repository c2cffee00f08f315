//! Work-conserving request policies.
//!
//! Every policy issues a new request the moment an update is received and
//! preempts the update in service once it has been served for `θ_n`, so
//! each attempt occupies `min(θ_n, X_n)`.

use rand::Rng;
use rand_distr::{Distribution, Triangular};
use serde::{Deserialize, Serialize};

use crate::analytic::ThresholdSequence;
use crate::distributions::ServiceDistribution;
use crate::error::{Error, Result};

/// Per-request i.i.d. threshold distribution of a randomized policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ThresholdSampler {
    Point { theta: f64 },
    Uniform { low: f64, high: f64 },
    LogUniform { low: f64, high: f64 },
    Triangular { low: f64, mode: f64, high: f64 },
    Discrete { values: Vec<f64>, weights: Vec<f64> },
}

impl ThresholdSampler {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSampler(msg));
        match self {
            Self::Point { theta } if !(theta.is_finite() && *theta >= 0.0) => bad(format!(
                "point threshold {theta} must be a nonnegative finite real"
            )),
            Self::Uniform { low, high } | Self::LogUniform { low, high }
                if !(low.is_finite() && high.is_finite() && *low >= 0.0 && low < high) =>
            {
                bad(format!("need 0 ≤ low < high, got [{low}, {high}]"))
            }
            Self::LogUniform { low, .. } if *low <= 0.0 => {
                bad("log-uniform sampler needs low > 0".into())
            }
            Self::Triangular { low, mode, high }
                if !(low.is_finite()
                    && high.is_finite()
                    && *low >= 0.0
                    && low < high
                    && low <= mode
                    && mode <= high) =>
            {
                bad(format!(
                    "need 0 ≤ low ≤ mode ≤ high, got ({low}, {mode}, {high})"
                ))
            }
            Self::Discrete { values, weights } => {
                if values.is_empty() || values.len() != weights.len() {
                    return bad("values and weights must be nonempty and of equal length".into());
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return bad("values must be nonnegative finite reals".into());
                }
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return bad("weights must be positive".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `(θ_min, θ_max)` of the sampler's support.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Self::Point { theta } => (*theta, *theta),
            Self::Uniform { low, high }
            | Self::LogUniform { low, high }
            | Self::Triangular { low, high, .. } => (*low, *high),
            Self::Discrete { values, .. } => values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(*v), hi.max(*v))
                }),
        }
    }

    /// Draws one threshold. A point mass consumes no randomness, so it
    /// reproduces the fixed-threshold path for the same seed.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Point { theta } => *theta,
            Self::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            Self::LogUniform { low, high } => {
                (low.ln() + (high.ln() - low.ln()) * rng.random::<f64>()).exp()
            }
            Self::Triangular { low, mode, high } => Triangular::new(*low, *high, *mode)
                .expect("validated triangular parameters")
                .sample(rng),
            Self::Discrete { values, weights } => {
                let total: f64 = weights.iter().sum();
                let u = rng.random::<f64>() * total;
                let mut acc = 0.0;
                for (v, w) in values.iter().zip(weights) {
                    acc += w;
                    if u < acc {
                        return *v;
                    }
                }
                values[values.len() - 1]
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Point { theta } => format!("point({theta})"),
            Self::Uniform { low, high } => format!("uniform({low},{high})"),
            Self::LogUniform { low, high } => format!("log-uniform({low},{high})"),
            Self::Triangular { low, mode, high } => format!("triangular({low},{mode},{high})"),
            Self::Discrete { values, .. } => format!("discrete({} values)", values.len()),
        }
    }
}

/// A request policy from the threshold taxonomy.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    FixedThreshold(f64),
    /// Never preempts (`θ_n = ∞`).
    ZeroWait,
    /// Fixed threshold at the support minimum `x_min`.
    XMinThreshold,
    /// Fixed threshold at the median of the service law.
    MedianThreshold,
    RepetitiveSequence(ThresholdSequence),
    RandomizedThreshold(ThresholdSampler),
}

impl Policy {
    pub fn label(&self) -> String {
        match self {
            Policy::FixedThreshold(theta) => format!("fixed({theta})"),
            Policy::ZeroWait => "zero-wait".into(),
            Policy::XMinThreshold => "xmin".into(),
            Policy::MedianThreshold => "median".into(),
            Policy::RepetitiveSequence(seq) => format!("repetitive({:?})", seq.thresholds()),
            Policy::RandomizedThreshold(sampler) => format!("randomized-{}", sampler.label()),
        }
    }

    /// Replaces distribution-relative variants by their concrete threshold.
    pub fn resolve(&self, d: &ServiceDistribution) -> Policy {
        match self {
            Policy::XMinThreshold => Policy::FixedThreshold(d.support_min()),
            Policy::MedianThreshold => Policy::FixedThreshold(d.quantile(0.5)),
            other => other.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Policy::FixedThreshold(theta) if theta.is_nan() || *theta < 0.0 => Err(
                Error::InvalidSequence(format!("fixed threshold {theta} must be nonnegative")),
            ),
            Policy::RandomizedThreshold(sampler) => sampler.validate(),
            _ => Ok(()),
        }
    }

    /// The threshold used at every attempt, when it does not vary.
    pub(crate) fn constant_threshold(&self, d: &ServiceDistribution) -> Option<f64> {
        match self.resolve(d) {
            Policy::FixedThreshold(theta) => Some(theta),
            Policy::ZeroWait => Some(f64::INFINITY),
            Policy::RandomizedThreshold(ThresholdSampler::Point { theta }) => Some(theta),
            _ => None,
        }
    }
}
