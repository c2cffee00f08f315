//! Value iteration on the per-request Bellman operator.
//!
//! Between two receptions each request with threshold `θ` costs
//! `c′(θ) = 2∫₀^θ x dF + θ·F̄(θ)` and leads to another request with
//! probability `F̄(θ)`. The operator
//!
//! ```text
//! T(U) = min_θ { c′(θ) + U·F̄(θ) }
//! ```
//!
//! is a contraction with modulus `max_θ F̄(θ) = F̄(θ_min)`, and since
//! `c′(θ)/F(θ) = ζ(s_θ)` its fixed point is `min_θ ζ(s_θ)`. Iterating it
//! gives an optimum that never touches the closed-form PAoI expressions,
//! which makes it a useful cross-check of the grid search.

use serde::Serialize;

use crate::distributions::ServiceDistribution;
use crate::error::{Error, Result};
use crate::optimizer::{SearchWindow, DEFAULT_GRID_POINTS};

pub const DEFAULT_MAX_SWEEPS: usize = 1_000_000;

/// The operator `T` restricted to a threshold grid.
#[derive(Debug, Clone)]
pub struct BellmanOperator {
    thetas: Vec<f64>,
    costs: Vec<f64>,
    survivals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub value: f64,
    pub argmin_theta: f64,
    pub sweeps: usize,
    pub last_change: f64,
}

/// `c′(θ) = 2∫₀^θ x dF + θ·F̄(θ)`.
pub fn request_cost(d: &ServiceDistribution, theta: f64) -> f64 {
    2.0 * d.truncated_first_moment(theta) + theta * d.sf(theta)
}

impl BellmanOperator {
    /// Builds the operator on the same grid the optimizer scans.
    pub fn new(d: &ServiceDistribution, window: SearchWindow, grid_points: usize) -> Result<Self> {
        window.validate(d)?;
        let thetas = window.grid(grid_points);
        let survivals: Vec<f64> = thetas.iter().map(|&t| d.sf(t)).collect();
        if survivals[0] >= 1.0 {
            return Err(Error::NoContraction {
                survival: survivals[0],
            });
        }
        let costs = thetas.iter().map(|&t| request_cost(d, t)).collect();
        Ok(Self {
            thetas,
            costs,
            survivals,
        })
    }

    /// Contraction modulus bound `F̄(θ_min)`.
    pub fn modulus(&self) -> f64 {
        self.survivals.iter().copied().fold(0.0, f64::max)
    }

    fn sweep(&self, u: f64) -> (f64, usize) {
        let mut best = f64::INFINITY;
        let mut at = 0;
        for (i, (c, s)) in self.costs.iter().zip(&self.survivals).enumerate() {
            let v = c + u * s;
            if v < best {
                best = v;
                at = i;
            }
        }
        (best, at)
    }

    /// One application of `T`.
    pub fn apply(&self, u: f64) -> f64 {
        self.sweep(u).0
    }

    /// Iterates from `U = 0` until successive values differ by less than `tol`.
    pub fn fixed_point(&self, tol: f64, max_sweeps: usize) -> Result<FixedPoint> {
        let mut u = 0.0;
        let mut change = f64::INFINITY;
        for sweep in 1..=max_sweeps {
            let (next, at) = self.sweep(u);
            change = (next - u).abs();
            u = next;
            if change < tol {
                return Ok(FixedPoint {
                    value: u,
                    argmin_theta: self.thetas[at],
                    sweeps: sweep,
                    last_change: change,
                });
            }
        }
        Err(Error::NotConverged {
            iterations: max_sweeps,
            last_change: change,
        })
    }
}

/// Fixed point of the Bellman operator on the default optimizer grid.
pub fn bellman_fixed_point(
    d: &ServiceDistribution,
    window: SearchWindow,
    tol: f64,
) -> Result<FixedPoint> {
    BellmanOperator::new(d, window, DEFAULT_GRID_POINTS)?.fixed_point(tol, DEFAULT_MAX_SWEEPS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::paoi_fixed_threshold;
    use proptest::prelude::*;

    #[test]
    fn deterministic_converges_to_two() {
        let d = ServiceDistribution::deterministic(1.0).unwrap();
        let fp = bellman_fixed_point(&d, SearchWindow::new(1.0, 5.0), 1e-12).unwrap();
        assert_eq!(fp.value, 2.0);
        assert_eq!(fp.argmin_theta, 1.0);
        // First sweep lands on 2, second confirms it.
        assert_eq!(fp.sweeps, 2);
    }

    #[test]
    fn exponential_fixed_point_at_left_endpoint() {
        let d = ServiceDistribution::exponential(1.0).unwrap();
        let fp = bellman_fixed_point(&d, SearchWindow::new(0.5, 10.0), 1e-12).unwrap();
        let oracle = paoi_fixed_threshold(&d, 0.5).zeta.to_f64();
        assert!(
            (fp.value - oracle).abs() < 1e-10,
            "{} vs {oracle}",
            fp.value
        );
        assert_eq!(fp.argmin_theta, 0.5);
    }

    #[test]
    fn window_below_support_is_not_a_contraction() {
        let d = ServiceDistribution::pareto(1.0, 2.0).unwrap();
        assert!(matches!(
            BellmanOperator::new(&d, SearchWindow::new(1.0, 3.0), 100),
            Err(Error::NoContraction { .. })
        ));
    }

    proptest! {
        #[test]
        fn sweep_contracts(u1 in 0.0f64..100.0, u2 in 0.0f64..100.0) {
            let d = ServiceDistribution::erlang(2, 1.0).unwrap();
            let op = BellmanOperator::new(&d, SearchWindow::new(0.3, 8.0), 400).unwrap();
            let lhs = (op.apply(u1) - op.apply(u2)).abs();
            prop_assert!(lhs <= op.modulus() * (u1 - u2).abs() + 1e-12);
        }
    }
}
