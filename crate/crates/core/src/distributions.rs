//! Service-time distribution catalog.
//!
//! Every PAoI formula in this crate consumes a distribution through four
//! primitives: the CDF, the truncated first moment `∫₀^θ x dF`, the
//! integrated CDF `∫₀^θ F(x) dx` and the upper-tail moment `∫_θ^∞ x dF`.
//! Stieltjes integrals over `[0, θ]` are right-closed: an atom sitting exactly
//! at `θ` contributes in full, consistent with the right-continuous CDF.
//!
//! Closed forms are used for every kind that has one. The log-normal
//! truncated moments go through adaptive quadrature
//! ([`crate::quadrature::DEFAULT_ABS_TOL`]).

use std::f64::consts::SQRT_2;
use std::fmt;

use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::quadrature::{integrate, DEFAULT_ABS_TOL};
use crate::special::{erlang_cdf_sf, erlang_integrated_cdf};

/// A service-time law from the supported catalog.
///
/// Serialized as `{ kind = "...", params = { ... } }`, e.g.
/// `{ kind = "pareto", params = { xm = 1.0, alpha = 3.0 } }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    content = "params",
    rename_all = "kebab-case",
    deny_unknown_fields
)]
pub enum ServiceDistribution {
    Exponential {
        rate: f64,
    },
    Erlang {
        shape: u32,
        rate: f64,
    },
    Pareto {
        xm: f64,
        alpha: f64,
    },
    ShiftedExponential {
        shift: f64,
        rate: f64,
    },
    /// `t1` with probability `p`, otherwise `t2`.
    TwoPoint {
        t1: f64,
        t2: f64,
        p: f64,
    },
    HyperExponential {
        rates: Vec<f64>,
        weights: Vec<f64>,
    },
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    Deterministic {
        value: f64,
    },
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be a positive finite real",
        })
    }
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

fn std_normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// Smallest `x` with `cdf(x) ≥ q`, for continuous increasing CDFs.
fn invert_by_bisection(cdf: impl Fn(f64) -> f64, q: f64, scale: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = scale.max(f64::MIN_POSITIVE);
    while cdf(hi) < q {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) >= q {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

// Unit-free helpers for an Erlang(k, rate) law.
fn erlang_cdf(k: u32, rate: f64, x: f64) -> f64 {
    erlang_cdf_sf(k, rate * x).0
}

fn erlang_sf(k: u32, rate: f64, x: f64) -> f64 {
    erlang_cdf_sf(k, rate * x).1
}

fn erlang_truncated(k: u32, rate: f64, theta: f64) -> f64 {
    f64::from(k) / rate * erlang_cdf(k + 1, rate, theta)
}

fn erlang_tail(k: u32, rate: f64, theta: f64) -> f64 {
    f64::from(k) / rate * erlang_sf(k + 1, rate, theta)
}

fn erlang_integrated(k: u32, rate: f64, theta: f64) -> f64 {
    erlang_integrated_cdf(k, rate * theta) / rate
}

impl ServiceDistribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        Self::Exponential { rate }.validated()
    }

    pub fn erlang(shape: u32, rate: f64) -> Result<Self> {
        Self::Erlang { shape, rate }.validated()
    }

    pub fn pareto(xm: f64, alpha: f64) -> Result<Self> {
        Self::Pareto { xm, alpha }.validated()
    }

    pub fn shifted_exponential(shift: f64, rate: f64) -> Result<Self> {
        Self::ShiftedExponential { shift, rate }.validated()
    }

    pub fn two_point(t1: f64, t2: f64, p: f64) -> Result<Self> {
        Self::TwoPoint { t1, t2, p }.validated()
    }

    pub fn hyper_exponential(rates: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Self::HyperExponential { rates, weights }.validated()
    }

    pub fn log_normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::LogNormal { mu, sigma }.validated()
    }

    pub fn deterministic(value: f64) -> Result<Self> {
        Self::Deterministic { value }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks the parameter constraints of each kind.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Exponential { rate } => positive("rate", *rate),
            Self::Erlang { shape, rate } => {
                if *shape == 0 {
                    return Err(Error::InvalidParameter {
                        name: "shape",
                        value: 0.0,
                        reason: "must be at least 1",
                    });
                }
                positive("rate", *rate)
            }
            Self::Pareto { xm, alpha } => {
                positive("xm", *xm)?;
                positive("alpha", *alpha)
            }
            Self::ShiftedExponential { shift, rate } => {
                if !(shift.is_finite() && *shift >= 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "shift",
                        value: *shift,
                        reason: "must be a nonnegative finite real",
                    });
                }
                positive("rate", *rate)
            }
            Self::TwoPoint { t1, t2, p } => {
                positive("t1", *t1)?;
                positive("t2", *t2)?;
                if t1 >= t2 {
                    return Err(Error::InvalidParameter {
                        name: "t2",
                        value: *t2,
                        reason: "must exceed t1",
                    });
                }
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(Error::InvalidParameter {
                        name: "p",
                        value: *p,
                        reason: "must lie strictly between 0 and 1",
                    });
                }
                Ok(())
            }
            Self::HyperExponential { rates, weights } => {
                if rates.is_empty() || rates.len() != weights.len() {
                    return Err(Error::InvalidParameter {
                        name: "weights",
                        value: weights.len() as f64,
                        reason: "rates and weights must be nonempty and of equal length",
                    });
                }
                for &r in rates {
                    positive("rates", r)?;
                }
                for &w in weights {
                    positive("weights", w)?;
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter {
                        name: "weights",
                        value: total,
                        reason: "weights must sum to 1",
                    });
                }
                Ok(())
            }
            Self::LogNormal { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "mu",
                        value: *mu,
                        reason: "must be finite",
                    });
                }
                positive("sigma", *sigma)
            }
            Self::Deterministic { value } => positive("value", *value),
        }
    }

    /// One member of every kind, used as a reference set in tests and checks.
    pub fn catalog() -> Vec<ServiceDistribution> {
        vec![
            Self::Exponential { rate: 1.0 },
            Self::Erlang {
                shape: 3,
                rate: 1.0,
            },
            Self::Pareto {
                xm: 1.0,
                alpha: 2.5,
            },
            Self::ShiftedExponential {
                shift: 0.5,
                rate: 2.0,
            },
            Self::TwoPoint {
                t1: 1.0,
                t2: 3.0,
                p: 0.5,
            },
            Self::HyperExponential {
                rates: vec![10.0, 1.0],
                weights: vec![0.5, 0.5],
            },
            Self::LogNormal {
                mu: 0.0,
                sigma: 0.75,
            },
            Self::Deterministic { value: 1.0 },
        ]
    }

    /// Short kind name as used in configuration files.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exponential",
            Self::Erlang { .. } => "erlang",
            Self::Pareto { .. } => "pareto",
            Self::ShiftedExponential { .. } => "shifted-exponential",
            Self::TwoPoint { .. } => "two-point",
            Self::HyperExponential { .. } => "hyper-exponential",
            Self::LogNormal { .. } => "log-normal",
            Self::Deterministic { .. } => "deterministic",
        }
    }

    /// Whether the law has point masses (and therefore no density).
    pub fn is_discrete(&self) -> bool {
        matches!(self, Self::TwoPoint { .. } | Self::Deterministic { .. })
    }

    /// `P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x == f64::INFINITY {
            return 1.0;
        }
        match self {
            Self::Exponential { rate } => erlang_cdf(1, *rate, x),
            Self::Erlang { shape, rate } => erlang_cdf(*shape, *rate, x),
            Self::Pareto { xm, alpha } => {
                if x < *xm {
                    0.0
                } else {
                    -(alpha * (xm / x).ln()).exp_m1()
                }
            }
            Self::ShiftedExponential { shift, rate } => erlang_cdf(1, *rate, x - shift),
            Self::TwoPoint { t1, t2, p } => {
                if x >= *t2 {
                    1.0
                } else if x >= *t1 {
                    *p
                } else {
                    0.0
                }
            }
            Self::HyperExponential { rates, weights } => rates
                .iter()
                .zip(weights)
                .map(|(r, w)| w * erlang_cdf(1, *r, x))
                .sum(),
            Self::LogNormal { mu, sigma } => {
                if x == 0.0 {
                    0.0
                } else {
                    std_normal_cdf((x.ln() - mu) / sigma)
                }
            }
            Self::Deterministic { value } => {
                if x >= *value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `P(X > x)`, computed directly rather than as `1 − cdf` where that
    /// matters for accuracy in the far tail.
    pub fn sf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        if x == f64::INFINITY {
            return 0.0;
        }
        match self {
            Self::Exponential { rate } => erlang_sf(1, *rate, x),
            Self::Erlang { shape, rate } => erlang_sf(*shape, *rate, x),
            Self::Pareto { xm, alpha } => {
                if x < *xm {
                    1.0
                } else {
                    (xm / x).powf(*alpha)
                }
            }
            Self::ShiftedExponential { shift, rate } => erlang_sf(1, *rate, x - shift),
            Self::HyperExponential { rates, weights } => rates
                .iter()
                .zip(weights)
                .map(|(r, w)| w * erlang_sf(1, *r, x))
                .sum(),
            Self::LogNormal { mu, sigma } => {
                if x == 0.0 {
                    1.0
                } else {
                    std_normal_sf((x.ln() - mu) / sigma)
                }
            }
            Self::TwoPoint { .. } | Self::Deterministic { .. } => 1.0 - self.cdf(x),
        }
    }

    /// Density of the continuous kinds; `None` for laws with atoms.
    pub fn pdf(&self, x: f64) -> Option<f64> {
        if self.is_discrete() {
            return None;
        }
        if x < 0.0 {
            return Some(0.0);
        }
        let exp_pdf = |rate: f64, x: f64| {
            if x < 0.0 {
                0.0
            } else {
                rate * (-rate * x).exp()
            }
        };
        Some(match self {
            Self::Exponential { rate } => exp_pdf(*rate, x),
            Self::Erlang { shape, rate } => {
                let k = f64::from(*shape);
                if x == 0.0 {
                    if *shape == 1 {
                        *rate
                    } else {
                        0.0
                    }
                } else {
                    (k * rate.ln() + (k - 1.0) * x.ln()
                        - rate * x
                        - statrs::function::gamma::ln_gamma(k))
                    .exp()
                }
            }
            Self::Pareto { xm, alpha } => {
                if x < *xm {
                    0.0
                } else {
                    alpha / x * (xm / x).powf(*alpha)
                }
            }
            Self::ShiftedExponential { shift, rate } => exp_pdf(*rate, x - shift),
            Self::HyperExponential { rates, weights } => rates
                .iter()
                .zip(weights)
                .map(|(r, w)| w * exp_pdf(*r, x))
                .sum(),
            Self::LogNormal { mu, sigma } => {
                if x == 0.0 {
                    0.0
                } else {
                    let z = (x.ln() - mu) / sigma;
                    (-0.5 * z * z).exp() / (x * sigma * (2.0 * std::f64::consts::PI).sqrt())
                }
            }
            Self::TwoPoint { .. } | Self::Deterministic { .. } => unreachable!(),
        })
    }

    /// `x_min`: the infimum of the support (the smallest atom for discrete kinds).
    pub fn support_min(&self) -> f64 {
        match self {
            Self::Exponential { .. }
            | Self::Erlang { .. }
            | Self::HyperExponential { .. }
            | Self::LogNormal { .. } => 0.0,
            Self::Pareto { xm, .. } => *xm,
            Self::ShiftedExponential { shift, .. } => *shift,
            Self::TwoPoint { t1, .. } => *t1,
            Self::Deterministic { value } => *value,
        }
    }

    /// `E[X]`, which is `+∞` for a Pareto law with `α ≤ 1`.
    pub fn mean(&self) -> ExtendedReal {
        let value = match self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Erlang { shape, rate } => f64::from(*shape) / rate,
            Self::Pareto { xm, alpha } => {
                if *alpha <= 1.0 {
                    return ExtendedReal::Infinite;
                }
                alpha * xm / (alpha - 1.0)
            }
            Self::ShiftedExponential { shift, rate } => shift + 1.0 / rate,
            Self::TwoPoint { t1, t2, p } => p * t1 + (1.0 - p) * t2,
            Self::HyperExponential { rates, weights } => {
                rates.iter().zip(weights).map(|(r, w)| w / r).sum()
            }
            Self::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Self::Deterministic { value } => *value,
        };
        ExtendedReal::new(value)
    }

    /// `E[X · 1{X ≤ θ}] = ∫₀^θ x dF(x)`, atoms at `θ` included.
    pub fn truncated_first_moment(&self, theta: f64) -> f64 {
        if theta < self.support_min() || theta <= 0.0 {
            return 0.0;
        }
        match self {
            Self::Exponential { rate } => erlang_truncated(1, *rate, theta),
            Self::Erlang { shape, rate } => erlang_truncated(*shape, *rate, theta),
            Self::Pareto { xm, alpha } => {
                // α·xm·(1 − (xm/θ)^(α−1))/(α − 1), with the α → 1 limit α·xm·ln(θ/xm).
                let log_ratio = (theta / xm).ln();
                let a1 = alpha - 1.0;
                if a1.abs() < 1e-12 {
                    alpha * xm * log_ratio
                } else {
                    alpha * xm * (-(-a1 * log_ratio).exp_m1()) / a1
                }
            }
            Self::ShiftedExponential { shift, rate } => {
                let u = theta - shift;
                shift * erlang_cdf(1, *rate, u) + erlang_truncated(1, *rate, u)
            }
            Self::TwoPoint { t1, t2, p } => {
                let mut m = p * t1;
                if theta >= *t2 {
                    m += (1.0 - p) * t2;
                }
                m
            }
            Self::HyperExponential { rates, weights } => rates
                .iter()
                .zip(weights)
                .map(|(r, w)| w * erlang_truncated(1, *r, theta))
                .sum(),
            Self::LogNormal { .. } => {
                integrate(
                    |x| x * self.pdf(x).unwrap_or(0.0),
                    0.0,
                    theta,
                    DEFAULT_ABS_TOL,
                )
                .value
            }
            Self::Deterministic { value } => *value,
        }
    }

    /// `E[X · 1{X > θ}] = ∫_θ^∞ x dF(x)`; `+∞` when the mean diverges.
    pub fn tail_first_moment(&self, theta: f64) -> ExtendedReal {
        let mean = self.mean();
        if theta < self.support_min() {
            return mean;
        }
        let value = match self {
            Self::Exponential { rate } => erlang_tail(1, *rate, theta),
            Self::Erlang { shape, rate } => erlang_tail(*shape, *rate, theta),
            Self::Pareto { xm, alpha } => {
                if *alpha <= 1.0 {
                    return ExtendedReal::Infinite;
                }
                alpha * xm / (alpha - 1.0) * (xm / theta).powf(alpha - 1.0)
            }
            Self::ShiftedExponential { shift, rate } => {
                let u = theta - shift;
                shift * erlang_sf(1, *rate, u) + erlang_tail(1, *rate, u)
            }
            Self::TwoPoint { t2, p, .. } => {
                if theta >= *t2 {
                    0.0
                } else {
                    (1.0 - p) * t2
                }
            }
            Self::HyperExponential { rates, weights } => rates
                .iter()
                .zip(weights)
                .map(|(r, w)| w * erlang_tail(1, *r, theta))
                .sum(),
            Self::LogNormal { .. } => (mean.to_f64() - self.truncated_first_moment(theta)).max(0.0),
            Self::Deterministic { value } => {
                if theta >= *value {
                    0.0
                } else {
                    *value
                }
            }
        };
        ExtendedReal::new(value)
    }

    /// `∫₀^θ F(x) dx`.
    pub fn integrated_cdf(&self, theta: f64) -> f64 {
        let x_min = self.support_min();
        if theta <= x_min || theta <= 0.0 {
            return 0.0;
        }
        match self {
            Self::Exponential { rate } => erlang_integrated(1, *rate, theta),
            Self::Erlang { shape, rate } => erlang_integrated(*shape, *rate, theta),
            Self::Pareto { xm, alpha } => {
                // (θ − xm) − xm·∫₁^{θ/xm} u^{−α} du
                let log_ratio = (theta / xm).ln();
                let one_minus = 1.0 - alpha;
                let power_integral = if one_minus.abs() < 1e-12 {
                    log_ratio
                } else {
                    (one_minus * log_ratio).exp_m1() / one_minus
                };
                (theta - xm) - xm * power_integral
            }
            Self::ShiftedExponential { shift, rate } => erlang_integrated(1, *rate, theta - shift),
            Self::TwoPoint { t1, t2, p } => p * (theta - t1) + (1.0 - p) * (theta - t2).max(0.0),
            Self::HyperExponential { rates, weights } => rates
                .iter()
                .zip(weights)
                .map(|(r, w)| w * erlang_integrated(1, *r, theta))
                .sum(),
            // Integration by parts against the (quadrature) truncated moment keeps
            // both integrals consistent to rounding, so θ·F̄/F stays accurate far
            // into the tail where it is much smaller than the quadrature tolerance.
            Self::LogNormal { .. } => {
                (theta * self.cdf(theta) - self.truncated_first_moment(theta)).max(0.0)
            }
            Self::Deterministic { value } => theta - value,
        }
    }

    /// Mean residual life `E[X − θ | X > θ]`.
    pub fn conditional_residual(&self, theta: f64) -> Result<ExtendedReal> {
        let survival = self.sf(theta);
        if survival <= 0.0 {
            return Err(Error::DegenerateCondition { theta });
        }
        Ok(match self.tail_first_moment(theta) {
            ExtendedReal::Infinite => ExtendedReal::Infinite,
            ExtendedReal::Finite(tail) => ExtendedReal::new((tail / survival - theta).max(0.0)),
        })
    }

    /// Generalized inverse `inf{x : F(x) ≥ q}` for `0 < q < 1`.
    pub fn quantile(&self, q: f64) -> f64 {
        assert!(
            q > 0.0 && q < 1.0,
            "quantile level must lie in (0, 1), got {q}"
        );
        match self {
            Self::Exponential { rate } => -(-q).ln_1p() / rate,
            Self::Erlang { shape, rate } => {
                let scale = f64::from(*shape) / rate;
                invert_by_bisection(|x| self.cdf(x), q, scale)
            }
            Self::Pareto { xm, alpha } => xm * (-(-q).ln_1p() / alpha).exp(),
            Self::ShiftedExponential { shift, rate } => shift - (-q).ln_1p() / rate,
            Self::TwoPoint { t1, t2, p } => {
                if q <= *p {
                    *t1
                } else {
                    *t2
                }
            }
            Self::HyperExponential { .. } => {
                invert_by_bisection(|x| self.cdf(x), q, self.mean().to_f64())
            }
            Self::LogNormal { mu, sigma } => (mu - sigma * SQRT_2 * erfc_inv(2.0 * q)).exp(),
            Self::Deterministic { value } => *value,
        }
    }

    /// One i.i.d. draw; see also the [`Distribution`] impl.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // 1 − u lies in (0, 1], so every logarithm below is finite.
        let unit_exp = |rng: &mut R| -(-rng.random::<f64>()).ln_1p();
        match self {
            Self::Exponential { rate } => unit_exp(rng) / rate,
            Self::Erlang { shape, rate } => (0..*shape).map(|_| unit_exp(rng)).sum::<f64>() / rate,
            Self::Pareto { xm, alpha } => xm * (unit_exp(rng) / alpha).exp(),
            Self::ShiftedExponential { shift, rate } => shift + unit_exp(rng) / rate,
            Self::TwoPoint { t1, t2, p } => {
                if rng.random::<f64>() < *p {
                    *t1
                } else {
                    *t2
                }
            }
            Self::HyperExponential { rates, weights } => {
                let u = rng.random::<f64>();
                let mut acc = 0.0;
                let mut phase = rates.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        phase = i;
                        break;
                    }
                }
                unit_exp(rng) / rates[phase]
            }
            Self::LogNormal { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                (mu + sigma * z).exp()
            }
            Self::Deterministic { value } => *value,
        }
    }
}

impl Distribution<f64> for ServiceDistribution {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        ServiceDistribution::sample(self, rng)
    }
}

impl fmt::Display for ServiceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { rate } => write!(f, "exponential(rate={rate})"),
            Self::Erlang { shape, rate } => write!(f, "erlang(shape={shape}, rate={rate})"),
            Self::Pareto { xm, alpha } => write!(f, "pareto(xm={xm}, alpha={alpha})"),
            Self::ShiftedExponential { shift, rate } => {
                write!(f, "shifted-exponential(shift={shift}, rate={rate})")
            }
            Self::TwoPoint { t1, t2, p } => write!(f, "two-point(t1={t1}, t2={t2}, p={p})"),
            Self::HyperExponential { rates, weights } => {
                write!(f, "hyper-exponential(rates={rates:?}, weights={weights:?})")
            }
            Self::LogNormal { mu, sigma } => write!(f, "log-normal(mu={mu}, sigma={sigma})"),
            Self::Deterministic { value } => write!(f, "deterministic(value={value})"),
        }
    }
}
