//! Optimal fixed threshold, minimum achievable PAoI and preemption verdicts.
//!
//! `ζ(s_θ)` is not unimodal in general (it is increasing for the
//! exponential law and convex for Erlang shapes `k ≥ 2`). The search
//! therefore scans a dense grid first and only then refines the best cell
//! with golden-section search.

use std::fmt;

use serde::Serialize;

use crate::analytic::{paoi_fixed_threshold, paoi_xmin_value, paoi_zero_wait};
use crate::distributions::ServiceDistribution;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::par::{map_indexed, Execution};

pub const DEFAULT_GRID_POINTS: usize = 2000;
/// Relative tolerance under which candidate policy values tie.
pub const TIE_RELATIVE_TOL: f64 = 1e-9;
/// Relative tolerance for the strict inequality against `2E[X]`.
pub const VERDICT_RELATIVE_TOL: f64 = 1e-9;
// Grid values this close to the minimum count as ties; the smallest θ wins.
const GRID_TIE_TOL: f64 = 1e-12;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Closed threshold interval `[θ_min, θ_max]` searched by the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchWindow {
    pub theta_min: f64,
    pub theta_max: f64,
}

impl SearchWindow {
    pub fn new(theta_min: f64, theta_max: f64) -> Self {
        Self {
            theta_min,
            theta_max,
        }
    }

    /// `θ_min` just above `x_min` and `θ_max` at the `1 − 10⁻⁶` quantile.
    ///
    /// For laws whose upper quantile collapses onto `θ_min` (a single atom),
    /// `θ_max` is pushed out to `θ_min + max(θ_min, 1)`.
    pub fn default_for(d: &ServiceDistribution) -> Self {
        let theta_min = d.support_min() * (1.0 + 1e-6) + 1e-9;
        let mut theta_max = d.quantile(1.0 - 1e-6);
        if theta_max <= theta_min {
            theta_max = theta_min + theta_min.max(1.0);
        }
        Self {
            theta_min,
            theta_max,
        }
    }

    pub fn validate(&self, d: &ServiceDistribution) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::InvalidWindow {
                theta_min: self.theta_min,
                theta_max: self.theta_max,
                reason,
            })
        };
        if !(self.theta_min.is_finite() && self.theta_max.is_finite()) {
            return fail("bounds must be finite".into());
        }
        if self.theta_min < d.support_min() {
            return fail(format!(
                "theta_min is below the support minimum {}",
                d.support_min()
            ));
        }
        if self.theta_min >= self.theta_max {
            return fail("theta_min must be smaller than theta_max".into());
        }
        Ok(())
    }

    /// `n` grid points including both endpoints; log-spaced when the window
    /// spans more than two decades.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2, "a grid needs at least two points");
        let (lo, hi) = (self.theta_min, self.theta_max);
        let last = (n - 1) as f64;
        let mut grid: Vec<f64> = if lo > 0.0 && hi / lo > 100.0 {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / last).exp())
                .collect()
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / last).collect()
        };
        grid[0] = lo;
        grid[n - 1] = hi;
        grid
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub grid_points: usize,
    /// Refinement tolerance on θ; defaults to `1e-8 · (θ_max − θ_min)`,
    /// tightened to `1e-8` times the refinement bracket when that is smaller.
    pub tol: Option<f64>,
    pub execution: Execution,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID_POINTS,
            tol: None,
            execution: Execution::default(),
        }
    }
}

impl SearchOptions {
    fn tol_for(&self, window: &SearchWindow) -> f64 {
        self.tol
            .unwrap_or(1e-8 * (window.theta_max - window.theta_min))
    }
}

/// Outcome of the threshold search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdOptimum {
    pub theta_dagger: f64,
    pub zeta: ExtendedReal,
    /// Best grid point before refinement.
    pub grid_theta: f64,
    pub grid_zeta: ExtendedReal,
    pub evaluations: usize,
    pub refinement_iterations: usize,
}

fn zeta_at(d: &ServiceDistribution, theta: f64) -> ExtendedReal {
    paoi_fixed_threshold(d, theta).zeta
}

/// Evaluates `ζ(s_θ)` on the grid in index order.
pub fn zeta_on_grid(d: &ServiceDistribution, grid: &[f64], exec: Execution) -> Vec<ExtendedReal> {
    map_indexed(grid.len(), exec, |i| zeta_at(d, grid[i]))
}

/// First index attaining the minimum, treating near-equal values as ties.
pub fn grid_argmin(values: &[ExtendedReal]) -> usize {
    let min = values.iter().copied().min().expect("nonempty grid");
    match min {
        ExtendedReal::Infinite => 0,
        ExtendedReal::Finite(m) => values
            .iter()
            .position(|v| v.to_f64() <= m + GRID_TIE_TOL * m.abs())
            .expect("minimum is attained"),
    }
}

/// Golden-section search on `[a, b]`; returns the best point seen and the
/// number of iterations.
fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64, usize) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iterations = 0;
    while (b - a) > tol && iterations < 200 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    if fc <= fd {
        (c, fc, iterations)
    } else {
        (d, fd, iterations)
    }
}

/// `θ† = argmin_{θ ∈ [θ_min, θ_max]} ζ(s_θ)` by grid scan plus local refinement.
///
/// Ties on the grid resolve to the smallest threshold.
pub fn optimal_threshold(
    d: &ServiceDistribution,
    window: SearchWindow,
    opts: &SearchOptions,
) -> Result<ThresholdOptimum> {
    window.validate(d)?;
    let tol = opts.tol_for(&window);
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidWindow {
            theta_min: window.theta_min,
            theta_max: window.theta_max,
            reason: format!("refinement tolerance must be positive, got {tol}"),
        });
    }
    let grid = window.grid(opts.grid_points);
    let values = zeta_on_grid(d, &grid, opts.execution);
    let best = grid_argmin(&values);
    let mut result = ThresholdOptimum {
        theta_dagger: grid[best],
        zeta: values[best],
        grid_theta: grid[best],
        grid_zeta: values[best],
        evaluations: grid.len(),
        refinement_iterations: 0,
    };
    let ExtendedReal::Finite(grid_best) = values[best] else {
        return Ok(result);
    };

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    // On log-spaced grids the bracket can be far narrower than the default
    // tolerance, which would skip refinement altogether.
    let tol = if opts.tol.is_some() {
        tol
    } else {
        tol.min(1e-8 * (hi - lo))
    };
    let (theta, value, iterations) = golden_section(|t| zeta_at(d, t).to_f64(), lo, hi, tol);
    result.evaluations += iterations + 2;
    result.refinement_iterations = iterations;
    if value < grid_best - GRID_TIE_TOL * grid_best.abs() {
        result.theta_dagger = theta;
        result.zeta = ExtendedReal::new(value);
    }
    Ok(result)
}

/// Which policy attains the minimum achievable PAoI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Winner {
    FixedThreshold,
    XMinThreshold,
    ZeroWait,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::FixedThreshold => "fixed-threshold",
            Winner::XMinThreshold => "xmin",
            Winner::ZeroWait => "zero-wait",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub theta_dagger: f64,
    pub zeta_at_theta_dagger: ExtendedReal,
    /// `2E[X]`
    pub zeta_zero_wait: ExtendedReal,
    pub zeta_xmin: ExtendedReal,
    pub zeta_star: ExtendedReal,
    pub winner: Winner,
    pub search_window: SearchWindow,
    pub evaluations: usize,
    pub refinement_iterations: usize,
    pub notes: Vec<&'static str>,
}

/// `ζ* = min(ζ(s_θ†), 2E[X], ζ(s_{x_min}))`.
///
/// Near-ties (within [`TIE_RELATIVE_TOL`]) prefer fixed-threshold, then
/// x_min, then zero-wait.
pub fn min_achievable_paoi(
    d: &ServiceDistribution,
    window: SearchWindow,
    opts: &SearchOptions,
) -> Result<OptimizationResult> {
    let optimum = optimal_threshold(d, window, opts)?;
    let xmin = paoi_xmin_value(d);
    let zero_wait = paoi_zero_wait(d);
    let mut notes = Vec::new();
    if let Some(note) = xmin.note {
        notes.push(note);
    }

    let mut winner = Winner::FixedThreshold;
    let mut best = optimum.zeta;
    let mut candidates = vec![(Winner::XMinThreshold, xmin.zeta)];
    if zero_wait.is_finite() {
        candidates.push((Winner::ZeroWait, zero_wait));
    } else {
        notes.push("infinite mean: zero-wait candidate skipped");
    }
    for (tag, value) in candidates {
        let beats = match (value, best) {
            (ExtendedReal::Finite(v), ExtendedReal::Finite(b)) => v < b * (1.0 - TIE_RELATIVE_TOL),
            (ExtendedReal::Finite(_), ExtendedReal::Infinite) => true,
            (ExtendedReal::Infinite, _) => false,
        };
        if beats {
            winner = tag;
            best = value;
        }
    }

    Ok(OptimizationResult {
        theta_dagger: optimum.theta_dagger,
        zeta_at_theta_dagger: optimum.zeta,
        zeta_zero_wait: zero_wait,
        zeta_xmin: xmin.zeta,
        zeta_star: best,
        winner,
        search_window: window,
        evaluations: optimum.evaluations,
        refinement_iterations: optimum.refinement_iterations,
        notes,
    })
}

/// Which condition produced a [`PreemptionVerdict`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// `min(ζ(s_θ†), ζ(s_{x_min})) < 2E[X]`.
    NecessarySufficient,
    /// `E[X] < E[X − θ | X > θ] + θ/2` for some θ.
    SufficientLemma3,
    /// `E[X − θ | X > θ] > E[X]` for some θ (mean residual life exceeds the mean).
    ResidualExceedsMean,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::NecessarySufficient => "necessary-sufficient",
            Condition::SufficientLemma3 => "lemma3-sufficient",
            Condition::ResidualExceedsMean => "residual-exceeds-mean",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreemptionVerdict {
    pub beneficial: bool,
    pub witness_theta: Option<f64>,
    pub condition_used: Condition,
    /// Positive when the condition holds with room to spare; `+∞` when the
    /// mean is infinite.
    pub margin: f64,
}

/// Whether some preemptive policy strictly beats zero-wait.
pub fn preemption_beneficial(
    d: &ServiceDistribution,
    window: SearchWindow,
    opts: &SearchOptions,
) -> Result<PreemptionVerdict> {
    let optimum = optimal_threshold(d, window, opts)?;
    let xmin = paoi_xmin_value(d).zeta;
    let (best, witness) = if xmin < optimum.zeta {
        (xmin, d.support_min())
    } else {
        (optimum.zeta, optimum.theta_dagger)
    };
    let zero_wait = paoi_zero_wait(d);
    let ExtendedReal::Finite(zw) = zero_wait else {
        return Ok(PreemptionVerdict {
            beneficial: true,
            witness_theta: best.is_finite().then_some(witness),
            condition_used: Condition::NecessarySufficient,
            margin: f64::INFINITY,
        });
    };
    let best = best.to_f64();
    let beneficial = best < zw * (1.0 - VERDICT_RELATIVE_TOL);
    Ok(PreemptionVerdict {
        beneficial,
        witness_theta: beneficial.then_some(witness),
        condition_used: Condition::NecessarySufficient,
        margin: zw - best,
    })
}

/// Searches `grid` for `θ` with `E[X] < E[X − θ | X > θ] + θ/2`.
///
/// Points with `P(X > θ) = 0` are skipped. With an infinite mean both sides
/// are infinite and the test is inconclusive (`beneficial = false`,
/// margin 0); [`preemption_beneficial`] settles that case.
pub fn lemma3_sufficient(d: &ServiceDistribution, grid: &[f64]) -> PreemptionVerdict {
    scan_residual(
        d,
        grid,
        Condition::SufficientLemma3,
        |mean, residual, theta| residual + 0.5 * theta - mean,
    )
}

/// Searches `grid` for `θ` with `E[X − θ | X > θ] > E[X]`.
pub fn residual_exceeds_mean(d: &ServiceDistribution, grid: &[f64]) -> PreemptionVerdict {
    scan_residual(
        d,
        grid,
        Condition::ResidualExceedsMean,
        |mean, residual, _| residual - mean,
    )
}

fn scan_residual(
    d: &ServiceDistribution,
    grid: &[f64],
    condition: Condition,
    slack: impl Fn(f64, f64, f64) -> f64,
) -> PreemptionVerdict {
    let inconclusive = PreemptionVerdict {
        beneficial: false,
        witness_theta: None,
        condition_used: condition,
        margin: 0.0,
    };
    let ExtendedReal::Finite(mean) = d.mean() else {
        return inconclusive;
    };
    let mut witness = None;
    let mut margin = f64::NEG_INFINITY;
    for &theta in grid {
        let Ok(residual) = d.conditional_residual(theta) else {
            continue;
        };
        let s = slack(mean, residual.to_f64(), theta);
        margin = margin.max(s);
        if witness.is_none() && s > VERDICT_RELATIVE_TOL * mean {
            witness = Some(theta);
        }
    }
    if margin == f64::NEG_INFINITY {
        return inconclusive;
    }
    PreemptionVerdict {
        beneficial: witness.is_some(),
        witness_theta: witness,
        condition_used: condition,
        margin,
    }
}

/// Critical `t2*` for the two-point law: preemptions help iff `t2 > t2*`.
///
/// Solves `t1(1 + p)/p < 2(p·t1 + (1 − p)·t2)` for `t2`.
pub fn twopoint_benefit_threshold(p: f64, t1: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "p must lie in (0, 1)");
    assert!(t1 > 0.0, "t1 must be positive");
    t1 * (1.0 / p + 1.0 - 2.0 * p) / (2.0 * (1.0 - p))
}
