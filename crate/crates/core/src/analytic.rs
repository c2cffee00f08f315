//! Average PAoI of work-conserving threshold policies in closed form.
//!
//! Every peak splits into the service time `X̌` of the update that reset the
//! age and the inter-reception time `Y` that follows, so the average PAoI is
//! `ζ = E[X̌] + E[Y]`. For a fixed threshold `θ`:
//!
//! ```text
//! E[X̌(s_θ)] = ∫₀^θ x dF / F(θ)
//! E[Y(s_θ)] = (θ − ∫₀^θ F(x) dx) / F(θ) = E[X̌(s_θ)] + θ·P(X > θ)/F(θ)
//! ```
//!
//! Repetitive threshold sequences go through the general series, evaluated
//! with a certified remainder.

use serde::Serialize;

use crate::distributions::ServiceDistribution;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::policy::Policy;

/// Default tolerance on the certified series remainder.
pub const DEFAULT_SERIES_TOL: f64 = 1e-10;

/// Terms summed inside the repeating tail before its geometric remainder is
/// added in closed form instead.
const MAX_TAIL_TERMS: usize = 1_000_000;

/// Thresholds used between two consecutive receptions.
///
/// The sequence restarts after every received update. Past its end the
/// last threshold repeats forever.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdSequence {
    thresholds: Vec<f64>,
}

impl ThresholdSequence {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::InvalidSequence("sequence must be nonempty".into()));
        }
        if let Some(bad) = thresholds.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::InvalidSequence(format!(
                "threshold {bad} is not a nonnegative finite real"
            )));
        }
        Ok(Self { thresholds })
    }

    pub fn constant(theta: f64) -> Result<Self> {
        Self::new(vec![theta])
    }

    /// Threshold for the `attempt`-th request after a reception (0-based).
    pub fn at(&self, attempt: usize) -> f64 {
        let last = self.thresholds.len() - 1;
        self.thresholds[attempt.min(last)]
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Average PAoI together with its two components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaoiValue {
    pub zeta: ExtendedReal,
    /// `E[X̌(s)]`
    pub expected_received_service: ExtendedReal,
    /// `E[Y(s)]`
    pub expected_interreception: ExtendedReal,
    /// Upper bound on the truncation error of `zeta`; zero for closed forms.
    pub truncation_bound: f64,
    pub note: Option<&'static str>,
}

impl PaoiValue {
    fn from_components(x_check: ExtendedReal, y: ExtendedReal) -> Self {
        PaoiValue {
            zeta: x_check + y,
            expected_received_service: x_check,
            expected_interreception: y,
            truncation_bound: 0.0,
            note: None,
        }
    }

    fn never_delivers(note: &'static str) -> Self {
        PaoiValue {
            note: Some(note),
            ..Self::from_components(ExtendedReal::Infinite, ExtendedReal::Infinite)
        }
    }
}

/// `E[X̌(s_θ)] = ∫₀^θ x dF / F(θ)`; `+∞` when `F(θ) = 0`.
pub fn expected_received_service(d: &ServiceDistribution, theta: f64) -> ExtendedReal {
    ExtendedReal::ratio(d.truncated_first_moment(theta), d.cdf(theta))
}

/// `E[Y(s_θ)] = (θ − ∫₀^θ F dx) / F(θ)`; `+∞` when `F(θ) = 0`.
pub fn expected_interreception(d: &ServiceDistribution, theta: f64) -> ExtendedReal {
    ExtendedReal::ratio(theta - d.integrated_cdf(theta), d.cdf(theta))
}

/// Average PAoI of the fixed-threshold policy `s_θ`.
pub fn paoi_fixed_threshold(d: &ServiceDistribution, theta: f64) -> PaoiValue {
    assert!(theta >= 0.0, "threshold must be nonnegative");
    if theta == f64::INFINITY {
        return paoi_zero_wait_value(d);
    }
    PaoiValue::from_components(
        expected_received_service(d, theta),
        expected_interreception(d, theta),
    )
}

/// `ζ(s_Z) = 2E[X]`.
pub fn paoi_zero_wait(d: &ServiceDistribution) -> ExtendedReal {
    d.mean() * 2.0
}

fn paoi_zero_wait_value(d: &ServiceDistribution) -> PaoiValue {
    PaoiValue::from_components(d.mean(), d.mean())
}

/// Average PAoI of the policy that requests every `x_min` time units.
///
/// Finite only when the law has an atom at `x_min`; otherwise no update
/// ever completes and the result is `+∞` with an explanatory note.
pub fn paoi_xmin_value(d: &ServiceDistribution) -> PaoiValue {
    let x_min = d.support_min();
    if d.cdf(x_min) > 0.0 {
        paoi_fixed_threshold(d, x_min)
    } else {
        PaoiValue::never_delivers("no atom at support minimum")
    }
}

pub fn paoi_xmin(d: &ServiceDistribution) -> ExtendedReal {
    paoi_xmin_value(d).zeta
}

/// Average PAoI of a deterministic-repetitive threshold policy.
///
/// Sums
///
/// ```text
/// E[X̌] = Σ_{j≥0} P_j ∫₀^{θ_{j+1}} x dF
/// E[Y] = E[X̌] + Σ_{j≥1} P_j F(θ_{j+1}) (θ_1 + … + θ_j)
/// ```
///
/// with `P_j = Π_{i≤j} P(X > θ_i)`, until the remainder of `ζ` is certified
/// below `tol`. Once the sequence has entered its repeating tail the
/// remainder is geometric, so the bound is exact rather than asymptotic;
/// when the tail survival is so close to one that the bound would need more
/// than a million further terms, that exact remainder is added instead.
pub fn paoi_repetitive(
    d: &ServiceDistribution,
    seq: &ThresholdSequence,
    tol: f64,
) -> Result<PaoiValue> {
    assert!(tol > 0.0, "series tolerance must be positive");
    let tail_theta = seq.at(seq.len() - 1);
    let tail_survival = d.sf(tail_theta);
    let tail_moment = d.truncated_first_moment(tail_theta);
    // F(θ) itself rather than 1 − P(X > θ), which cancels when F(θ) is tiny.
    let tail_success = d.cdf(tail_theta);

    let mut x_check = 0.0;
    let mut extra_y = 0.0;
    let mut survival = 1.0;
    let mut elapsed = 0.0;
    let mut bound = 0.0;
    let mut note = None;
    let last_term = seq.len() - 1 + MAX_TAIL_TERMS;
    for attempt in 0..=last_term {
        let theta = seq.at(attempt);
        x_check += survival * d.truncated_first_moment(theta);
        extra_y += survival * d.cdf(theta) * elapsed;
        elapsed += theta;
        survival *= d.sf(theta);
        if survival == 0.0 {
            bound = 0.0;
            break;
        }
        if attempt + 1 >= seq.len() {
            if tail_success <= 0.0 {
                return Err(Error::SeriesDiverged(format!(
                    "tail threshold {tail_theta} is below the support (P(X > θ) = 1)"
                )));
            }
            // Past this point every term uses the tail threshold, so the
            // remainders are geometric sums known exactly.
            let q = tail_survival;
            let rem_x = survival * tail_moment / tail_success;
            let rem_y = survival * (elapsed + tail_theta * q / tail_success);
            bound = 2.0 * rem_x + rem_y;
            if bound < tol {
                break;
            }
            if attempt == last_term {
                x_check += rem_x;
                extra_y += rem_y;
                // Only rounding in the long partial sums remains.
                bound = (attempt + 1) as f64 * f64::EPSILON * (2.0 * x_check + extra_y);
                note = Some("slowly converging tail summed in closed form");
            }
        }
    }
    let x_check = ExtendedReal::new(x_check);
    let y = x_check + ExtendedReal::new(extra_y);
    Ok(PaoiValue {
        truncation_bound: bound,
        note,
        ..PaoiValue::from_components(x_check, y)
    })
}

/// Dispatches over the policy taxonomy.
///
/// Randomized thresholds have no closed form and yield
/// [`Error::NoAnalyticForm`].
pub fn paoi_policy(d: &ServiceDistribution, policy: &Policy) -> Result<PaoiValue> {
    match policy {
        Policy::FixedThreshold(theta) => Ok(paoi_fixed_threshold(d, *theta)),
        Policy::MedianThreshold => Ok(paoi_fixed_threshold(d, d.quantile(0.5))),
        Policy::ZeroWait => Ok(paoi_zero_wait_value(d)),
        Policy::XMinThreshold => Ok(paoi_xmin_value(d)),
        Policy::RepetitiveSequence(seq) => paoi_repetitive(d, seq, DEFAULT_SERIES_TOL),
        Policy::RandomizedThreshold(_) => Err(Error::NoAnalyticForm(policy.label())),
    }
}
