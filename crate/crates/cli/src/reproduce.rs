//! Data bundles for the four evaluation figures.
//!
//! | figure | law                     | content                         | columns                      |
//! |--------|-------------------------|---------------------------------|------------------------------|
//! | fig4   | Erlang(k, 1), k = 1..4  | ζ(s_θ) for θ ∈ [0.05, 15]       | `param,theta,zeta,is_minimum` |
//! | fig5   | Erlang(k, 1), k = 1..6  | zero-wait / optimal / median    | `param,policy,zeta`          |
//! | fig6   | Pareto(1, α)            | ζ(s_θ) for θ ∈ [1.01, 20]       | `param,theta,zeta,is_minimum` |
//! | fig7   | Pareto(1, α)            | zero-wait / optimal / median    | `param,policy,zeta`          |
//!
//! `param` is `k` for the Erlang figures and `α ∈ {0.5, 1, 1.5, 2, 2.5, 3}`
//! for the Pareto ones. `optimal` is the minimum achievable PAoI over the
//! default threshold window.

use std::fmt::Write as _;

use clap::ValueEnum;
use paoi_core::analytic::{paoi_fixed_threshold, paoi_zero_wait};
use paoi_core::optimizer::{grid_argmin, min_achievable_paoi, zeta_on_grid, SearchOptions};
use paoi_core::par::map_indexed;
use paoi_core::{Execution, ExtendedReal, SearchWindow, ServiceDistribution};

use crate::commands::Outcome;
use crate::config::OutputConfig;
use crate::error::Result;
use crate::output::{ext, num, CsvFile};

pub const ERLANG_SWEEP_SHAPES: [u32; 4] = [1, 2, 3, 4];
pub const ERLANG_POLICY_SHAPES: [u32; 6] = [1, 2, 3, 4, 5, 6];
pub const PARETO_ALPHAS: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
pub const CURVE_POINTS: usize = 300;
const ERLANG_THETA_RANGE: (f64, f64) = (0.05, 15.0);
const PARETO_THETA_RANGE: (f64, f64) = (1.01, 20.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub param: f64,
    pub theta: f64,
    pub zeta: ExtendedReal,
    pub is_minimum: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRow {
    pub param: f64,
    pub policy: &'static str,
    pub zeta: ExtendedReal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FigureData {
    Curves(Vec<CurveRow>),
    Policies(Vec<PolicyRow>),
}

fn erlang(k: u32) -> ServiceDistribution {
    ServiceDistribution::erlang(k, 1.0).expect("valid shape")
}

fn pareto(alpha: f64) -> ServiceDistribution {
    ServiceDistribution::pareto(1.0, alpha).expect("valid tail index")
}

fn curves(laws: &[(f64, ServiceDistribution)], range: (f64, f64)) -> Vec<CurveRow> {
    let grid = SearchWindow::new(range.0, range.1).grid(CURVE_POINTS);
    let mut rows = Vec::new();
    for (param, d) in laws {
        let zetas = zeta_on_grid(d, &grid, Execution::Parallel);
        let best = grid_argmin(&zetas);
        rows.extend(
            grid.iter()
                .zip(&zetas)
                .enumerate()
                .map(|(i, (theta, zeta))| CurveRow {
                    param: *param,
                    theta: *theta,
                    zeta: *zeta,
                    is_minimum: i == best && zeta.is_finite(),
                }),
        );
    }
    rows
}

fn policy_comparison(laws: &[(f64, ServiceDistribution)]) -> Result<Vec<PolicyRow>> {
    let per_law = map_indexed(laws.len(), Execution::Parallel, |i| {
        let (param, d) = &laws[i];
        let optimal =
            min_achievable_paoi(d, SearchWindow::default_for(d), &SearchOptions::default())?;
        Ok::<_, paoi_core::Error>([
            PolicyRow {
                param: *param,
                policy: "zero-wait",
                zeta: paoi_zero_wait(d),
            },
            PolicyRow {
                param: *param,
                policy: "optimal",
                zeta: optimal.zeta_star,
            },
            PolicyRow {
                param: *param,
                policy: "median",
                zeta: paoi_fixed_threshold(d, d.quantile(0.5)).zeta,
            },
        ])
    });
    let mut rows = Vec::new();
    for result in per_law {
        rows.extend(result?);
    }
    Ok(rows)
}

pub fn figure_data(figure: Figure) -> Result<FigureData> {
    let erlangs = |shapes: &[u32]| {
        shapes
            .iter()
            .map(|&k| (f64::from(k), erlang(k)))
            .collect::<Vec<_>>()
    };
    let paretos = PARETO_ALPHAS
        .iter()
        .map(|&a| (a, pareto(a)))
        .collect::<Vec<_>>();
    Ok(match figure {
        Figure::Fig4 => {
            FigureData::Curves(curves(&erlangs(&ERLANG_SWEEP_SHAPES), ERLANG_THETA_RANGE))
        }
        Figure::Fig5 => FigureData::Policies(policy_comparison(&erlangs(&ERLANG_POLICY_SHAPES))?),
        Figure::Fig6 => FigureData::Curves(curves(&paretos, PARETO_THETA_RANGE)),
        Figure::Fig7 => FigureData::Policies(policy_comparison(&paretos)?),
    })
}

/// Computes one figure bundle and writes `<prefix><figure>.csv`.
pub fn reproduce(figure: Figure, output: &OutputConfig) -> Result<Outcome<FigureData>> {
    let data = figure_data(figure)?;
    let path = output.file(&format!("{}.csv", figure.name()));
    let mut report = String::new();
    let csv = match &data {
        FigureData::Curves(rows) => {
            let mut csv = CsvFile::create(&path, &["param", "theta", "zeta", "is_minimum"])?;
            for r in rows {
                csv.row([
                    num(r.param),
                    num(r.theta),
                    ext(r.zeta),
                    r.is_minimum.to_string(),
                ])?;
                if r.is_minimum {
                    let _ = writeln!(
                        report,
                        "param {:<4} minimum zeta {} at theta {}",
                        r.param, r.zeta, r.theta
                    );
                }
            }
            csv
        }
        FigureData::Policies(rows) => {
            let mut csv = CsvFile::create(&path, &["param", "policy", "zeta"])?;
            for r in rows {
                csv.row([num(r.param), r.policy.to_string(), ext(r.zeta)])?;
                let _ = writeln!(report, "param {:<4} {:<10} {}", r.param, r.policy, r.zeta);
            }
            csv
        }
    };
    let files = vec![csv.finish()?];
    let _ = writeln!(report, "wrote {}", files[0].display());
    Ok(Outcome {
        data,
        report,
        files,
    })
}
