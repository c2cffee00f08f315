//! The analysis commands behind `eval`, `sweep`, `optimize`, `simulate` and `check`.
//!
//! Each command returns its structured results together with the text
//! report printed on stdout and the files it wrote.

use std::fmt::Write as _;
use std::path::PathBuf;

use paoi_core::analytic::{paoi_fixed_threshold, paoi_policy};
use paoi_core::bellman::{BellmanOperator, DEFAULT_MAX_SWEEPS};
use paoi_core::optimizer::{
    grid_argmin, lemma3_sufficient, min_achievable_paoi, optimal_threshold, preemption_beneficial,
    residual_exceeds_mean, twopoint_benefit_threshold, zeta_on_grid, ThresholdOptimum,
};
use paoi_core::simulator::{
    aoi_trajectory, replicate, replication_seed, simulate_peaks, Replications,
};
use paoi_core::{
    Error, Execution, ExtendedReal, OptimizationResult, PaoiValue, Policy, PreemptionVerdict,
    SearchWindow, ServiceDistribution,
};

use crate::config::{ExperimentConfig, PolicySpec, Spacing, SweepConfig};
use crate::error::Result;
use crate::output::{ext, num, slug, CsvFile};

/// Structured results plus what the command printed and wrote.
#[derive(Debug)]
pub struct Outcome<T> {
    pub data: T,
    pub report: String,
    pub files: Vec<PathBuf>,
}

/// Lazily computed optimal threshold, shared by every `optimal` policy entry.
struct OptimalThreshold<'a> {
    config: &'a ExperimentConfig,
    cached: Option<ThresholdOptimum>,
}

impl<'a> OptimalThreshold<'a> {
    fn new(config: &'a ExperimentConfig) -> Self {
        Self {
            config,
            cached: None,
        }
    }

    fn get(&mut self) -> Result<&ThresholdOptimum> {
        if self.cached.is_none() {
            let d = &self.config.distribution;
            let opt = &self.config.optimizer;
            self.cached = Some(optimal_threshold(d, opt.window(d), &opt.options())?);
        }
        Ok(self.cached.as_ref().expect("just computed"))
    }

    fn policy(&mut self, spec: &PolicySpec) -> Result<Policy> {
        spec.to_policy(|| Ok(self.get()?.theta_dagger))
    }
}

/// Threshold applied at every attempt, when the policy has a single one.
fn constant_threshold(d: &ServiceDistribution, policy: &Policy) -> Option<f64> {
    match policy.resolve(d) {
        Policy::FixedThreshold(theta) => Some(theta),
        Policy::ZeroWait => Some(f64::INFINITY),
        _ => None,
    }
}

fn opt_num(value: Option<f64>) -> String {
    value.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub policy: String,
    pub theta: Option<f64>,
    /// `None` for randomized policies, which only the simulator can evaluate.
    pub value: Option<PaoiValue>,
}

/// ζ, E[X̌] and E[Y] for every configured policy.
pub fn eval(config: &ExperimentConfig) -> Result<Outcome<Vec<EvalRow>>> {
    let d = &config.distribution;
    let mut optimal = OptimalThreshold::new(config);
    let mut rows = Vec::new();
    for spec in &config.policies {
        let policy = optimal.policy(spec)?;
        let value = match paoi_policy(d, &policy) {
            Ok(v) => Some(v),
            Err(Error::NoAnalyticForm(_)) => None,
            Err(e) => return Err(e.into()),
        };
        rows.push(EvalRow {
            policy: spec.label(),
            theta: constant_threshold(d, &policy),
            value,
        });
    }

    let mut report = format!("distribution: {d}\n");
    let _ = writeln!(
        report,
        "{:<28} {:>14} {:>14} {:>14} {:>14}",
        "policy", "theta", "zeta", "E[X_check]", "E[Y]"
    );
    let path = config.output.file("eval.csv");
    let mut csv = CsvFile::create(
        &path,
        &[
            "policy",
            "theta",
            "zeta",
            "e_x_check",
            "e_y",
            "truncation_bound",
        ],
    )?;
    for row in &rows {
        let theta = opt_num(row.theta);
        let (zeta, x, y, bound) = match &row.value {
            Some(v) => (
                ext(v.zeta),
                ext(v.expected_received_service),
                ext(v.expected_interreception),
                num(v.truncation_bound),
            ),
            None => Default::default(),
        };
        let shown = |s: &str| {
            if s.is_empty() {
                "-".to_string()
            } else {
                s.to_string()
            }
        };
        let _ = write!(
            report,
            "{:<28} {:>14} {:>14} {:>14} {:>14}",
            row.policy,
            shown(&theta),
            shown(&zeta),
            shown(&x),
            shown(&y)
        );
        match &row.value {
            Some(PaoiValue {
                note: Some(note), ..
            }) => {
                let _ = write!(report, "  ({note})");
            }
            None => report.push_str("  (no closed form; use simulate)"),
            _ => {}
        }
        report.push('\n');
        csv.row([row.policy.as_str(), &theta, &zeta, &x, &y, &bound])?;
    }
    let files = vec![csv.finish()?];
    Ok(Outcome {
        data: rows,
        report,
        files,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub value: PaoiValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Index of the smallest finite ζ (the first one on ties).
    pub minimum: Option<usize>,
}

/// θ values of a sweep, ascending and including both ends.
pub fn sweep_grid(
    d: &ServiceDistribution,
    sweep: &SweepConfig,
    window: SearchWindow,
) -> Result<Vec<f64>> {
    let window = SearchWindow::new(
        sweep.min.unwrap_or(window.theta_min),
        sweep.max.unwrap_or(window.theta_max),
    );
    window.validate(d)?;
    let (lo, hi) = (window.theta_min, window.theta_max);
    let last = (sweep.count - 1) as f64;
    let mut grid: Vec<f64> = match sweep.spacing {
        Spacing::Linear => (0..sweep.count)
            .map(|i| lo + (hi - lo) * i as f64 / last)
            .collect(),
        Spacing::Log => {
            if lo <= 0.0 {
                return Err(Error::InvalidWindow {
                    theta_min: lo,
                    theta_max: hi,
                    reason: "log spacing needs a positive lower end".into(),
                }
                .into());
            }
            let (a, b) = (lo.ln(), hi.ln());
            (0..sweep.count)
                .map(|i| (a + (b - a) * i as f64 / last).exp())
                .collect()
        }
    };
    grid[0] = lo;
    grid[sweep.count - 1] = hi;
    Ok(grid)
}

/// ζ(s_θ) and its components over the configured θ range.
pub fn sweep(config: &ExperimentConfig) -> Result<Outcome<SweepTable>> {
    let d = &config.distribution;
    let grid = sweep_grid(d, &config.sweep, config.optimizer.window(d))?;
    let values = paoi_core::par::map_indexed(grid.len(), Execution::Parallel, |i| {
        paoi_fixed_threshold(d, grid[i])
    });
    let zetas: Vec<ExtendedReal> = values.iter().map(|v| v.zeta).collect();
    let best = grid_argmin(&zetas);
    let minimum = zetas[best].is_finite().then_some(best);

    let path = config.output.file("sweep.csv");
    let mut csv = CsvFile::create(&path, &["theta", "zeta", "e_x_check", "e_y", "is_minimum"])?;
    for (i, (theta, v)) in grid.iter().zip(&values).enumerate() {
        csv.row([
            num(*theta),
            ext(v.zeta),
            ext(v.expected_received_service),
            ext(v.expected_interreception),
            (minimum == Some(i)).to_string(),
        ])?;
    }
    let files = vec![csv.finish()?];

    let mut report = format!(
        "distribution: {d}\nswept {} thresholds in [{}, {}]\n",
        grid.len(),
        grid[0],
        grid[grid.len() - 1]
    );
    match minimum {
        Some(i) => {
            let _ = writeln!(
                report,
                "minimum on grid: zeta = {} at theta = {}",
                zetas[i], grid[i]
            );
        }
        None => report.push_str("zeta is infinite on the whole grid\n"),
    }
    let rows = grid
        .into_iter()
        .zip(values)
        .map(|(theta, value)| SweepRow { theta, value })
        .collect();
    Ok(Outcome {
        data: SweepTable { rows, minimum },
        report,
        files,
    })
}

/// Bellman value iteration compared with the grid minimum on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BellmanCheck {
    pub window: SearchWindow,
    pub modulus: f64,
    pub value: f64,
    pub argmin_theta: f64,
    pub grid_minimum: f64,
    pub relative_delta: f64,
    pub sweeps: usize,
}

/// Value iteration contracts at rate `P(X > θ_min)`, which is essentially one
/// on the default window, so the check raises `θ_min` to the 1% quantile
/// when needed and compares against the grid minimum of that window.
pub fn bellman_check(
    d: &ServiceDistribution,
    window: SearchWindow,
    grid_points: usize,
) -> std::result::Result<BellmanCheck, String> {
    let lo = window.theta_min.max(d.quantile(0.01));
    if lo >= window.theta_max {
        return Err("window lies below the 1% quantile".into());
    }
    let window = SearchWindow::new(lo, window.theta_max);
    let op = BellmanOperator::new(d, window, grid_points).map_err(|e| e.to_string())?;
    let fp = op
        .fixed_point(1e-11, DEFAULT_MAX_SWEEPS)
        .map_err(|e| e.to_string())?;
    let grid = window.grid(grid_points);
    let grid_minimum = zeta_on_grid(d, &grid, Execution::Parallel)
        .into_iter()
        .min()
        .expect("nonempty grid")
        .to_f64();
    Ok(BellmanCheck {
        window,
        modulus: op.modulus(),
        value: fp.value,
        argmin_theta: fp.argmin_theta,
        grid_minimum,
        relative_delta: (fp.value - grid_minimum).abs() / grid_minimum,
        sweeps: fp.sweeps,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeReport {
    pub result: OptimizationResult,
    pub verdict: PreemptionVerdict,
    pub bellman: std::result::Result<BellmanCheck, String>,
}

/// Optimal threshold, minimum achievable PAoI, verdict and Bellman cross-check.
pub fn optimize(config: &ExperimentConfig) -> Result<Outcome<OptimizeReport>> {
    let d = &config.distribution;
    let window = config.optimizer.window(d);
    let opts = config.optimizer.options();
    let result = min_achievable_paoi(d, window, &opts)?;
    let verdict = preemption_beneficial(d, window, &opts)?;
    let bellman = bellman_check(d, window, opts.grid_points);

    let mut rows: Vec<(&str, String)> = vec![
        ("distribution", d.to_string()),
        ("theta_min", num(window.theta_min)),
        ("theta_max", num(window.theta_max)),
        ("theta_dagger", num(result.theta_dagger)),
        ("zeta_at_theta_dagger", ext(result.zeta_at_theta_dagger)),
        ("zeta_zero_wait", ext(result.zeta_zero_wait)),
        ("zeta_xmin", ext(result.zeta_xmin)),
        ("zeta_star", ext(result.zeta_star)),
        ("winner", result.winner.to_string()),
        ("evaluations", result.evaluations.to_string()),
        (
            "refinement_iterations",
            result.refinement_iterations.to_string(),
        ),
        ("preemption_beneficial", verdict.beneficial.to_string()),
        ("preemption_margin", num(verdict.margin)),
        ("preemption_witness_theta", opt_num(verdict.witness_theta)),
    ];
    match &bellman {
        Ok(b) => rows.extend([
            ("bellman_theta_min", num(b.window.theta_min)),
            ("bellman_modulus", num(b.modulus)),
            ("bellman_value", num(b.value)),
            ("bellman_argmin_theta", num(b.argmin_theta)),
            ("bellman_grid_minimum", num(b.grid_minimum)),
            ("bellman_relative_delta", num(b.relative_delta)),
            ("bellman_sweeps", b.sweeps.to_string()),
        ]),
        Err(reason) => rows.push(("bellman_skipped", reason.clone())),
    }
    let notes = result.notes.join("; ");
    if !notes.is_empty() {
        rows.push(("notes", notes));
    }

    let path = config.output.file("optimize.csv");
    let mut csv = CsvFile::create(&path, &["quantity", "value"])?;
    let mut report = String::new();
    for (quantity, value) in &rows {
        csv.row([quantity, value.as_str()])?;
        let _ = writeln!(report, "{quantity:<26} {value}");
    }
    let files = vec![csv.finish()?];
    Ok(Outcome {
        data: OptimizeReport {
            result,
            verdict,
            bellman,
        },
        report,
        files,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPolicy {
    pub policy: String,
    /// Closed-form ζ when one exists.
    pub analytic: Option<ExtendedReal>,
    pub replications: Replications,
}

/// Independent replications per policy with a pooled batch-means estimate.
pub fn simulate(config: &ExperimentConfig) -> Result<Outcome<Vec<SimulatedPolicy>>> {
    let d = &config.distribution;
    let sim = &config.simulation;
    let opts = sim.options();
    let mut optimal = OptimalThreshold::new(config);
    let mut results = Vec::new();
    let mut files = Vec::new();
    let mut report = format!(
        "distribution: {d}\n{} replications x {} peaks, base seed {}\n",
        sim.replications, sim.peaks, sim.seed
    );
    let _ = writeln!(
        report,
        "{:<28} {:>12} {:>12} {:>25} {:>12}",
        "policy", "mean", "stderr", "95% CI", "analytic"
    );
    for spec in &config.policies {
        let policy = optimal.policy(spec)?;
        let analytic = paoi_policy(d, &policy).ok().map(|v| v.zeta);
        let replications = replicate(
            d,
            &policy,
            sim.peaks,
            sim.replications,
            sim.seed,
            &opts,
            Execution::Parallel,
        )?;
        let name = slug(&spec.label());

        let path = config.output.file(&format!("simulate-{name}.csv"));
        let header = [
            "replication",
            "seed",
            "peaks",
            "mean",
            "stderr",
            "ci_low",
            "ci_high",
        ];
        let mut csv = CsvFile::create(&path, &header)?;
        let rows = replications
            .estimates
            .iter()
            .enumerate()
            .map(|(r, e)| (r.to_string(), e))
            .chain(std::iter::once((
                "pooled".to_string(),
                &replications.pooled,
            )));
        for (label, e) in rows {
            csv.row([
                label,
                e.seed.to_string(),
                e.peak_count.to_string(),
                num(e.mean),
                num(e.std_error),
                num(e.ci95.0),
                num(e.ci95.1),
            ])?;
        }
        files.push(csv.finish()?);

        let seed0 = replication_seed(sim.seed, 0);
        if sim.export_peaks {
            let peaks = simulate_peaks(d, &policy, sim.peaks, seed0, &opts)?;
            let path = config.output.file(&format!("peaks-{name}.csv"));
            let header = [
                "k",
                "peak",
                "received_service",
                "interreception",
                "preemption_count",
                "receive_time",
            ];
            let mut csv = CsvFile::create(&path, &header)?;
            for p in &peaks {
                csv.row([
                    p.k.to_string(),
                    num(p.peak),
                    num(p.received_service),
                    num(p.interreception),
                    p.preemption_count.to_string(),
                    num(p.receive_time),
                ])?;
            }
            files.push(csv.finish()?);
        }
        if let Some(horizon) = sim.trajectory_horizon {
            let trajectory = aoi_trajectory(d, &policy, horizon, seed0)?;
            let path = config.output.file(&format!("trajectory-{name}.csv"));
            let mut csv = CsvFile::create(&path, &["t", "age_before", "age_after"])?;
            let start = num(trajectory.initial_age);
            csv.row(["0", start.as_str(), start.as_str()])?;
            for b in &trajectory.breakpoints {
                csv.row([num(b.t), num(b.age_before), num(b.age_after)])?;
            }
            files.push(csv.finish()?);
        }

        let p = &replications.pooled;
        let _ = writeln!(
            report,
            "{:<28} {:>12.6} {:>12.6} {:>25} {:>12}",
            spec.label(),
            p.mean,
            p.std_error,
            format!("[{:.6}, {:.6}]", p.ci95.0, p.ci95.1),
            analytic
                .map(|z| z.to_string())
                .unwrap_or_else(|| "-".into())
        );
        results.push(SimulatedPolicy {
            policy: spec.label(),
            analytic,
            replications,
        });
    }
    Ok(Outcome {
        data: results,
        report,
        files,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub necessary_sufficient: PreemptionVerdict,
    pub lemma3: PreemptionVerdict,
    pub residual_exceeds_mean: PreemptionVerdict,
    /// Critical long service time `t2*` for two-point laws.
    pub critical_t2: Option<f64>,
}

/// When are preemptions beneficial: the exact verdict and the sufficient tests.
pub fn check(config: &ExperimentConfig) -> Result<Outcome<CheckReport>> {
    let d = &config.distribution;
    let window = config.optimizer.window(d);
    let opts = config.optimizer.options();
    let grid = window.grid(opts.grid_points);
    let data = CheckReport {
        necessary_sufficient: preemption_beneficial(d, window, &opts)?,
        lemma3: lemma3_sufficient(d, &grid),
        residual_exceeds_mean: residual_exceeds_mean(d, &grid),
        critical_t2: match d {
            ServiceDistribution::TwoPoint { t1, p, .. } => {
                Some(twopoint_benefit_threshold(*p, *t1))
            }
            _ => None,
        },
    };

    let path = config.output.file("check.csv");
    let mut csv = CsvFile::create(
        &path,
        &["condition", "beneficial", "witness_theta", "margin"],
    )?;
    let mut report = format!("distribution: {d}\n");
    for v in [
        &data.necessary_sufficient,
        &data.lemma3,
        &data.residual_exceeds_mean,
    ] {
        let witness = opt_num(v.witness_theta);
        csv.row([
            v.condition_used.to_string(),
            v.beneficial.to_string(),
            witness.clone(),
            num(v.margin),
        ])?;
        let _ = writeln!(
            report,
            "{:<24} beneficial={:<5} witness={:<22} margin={}",
            v.condition_used.to_string(),
            v.beneficial,
            if witness.is_empty() {
                "none".to_string()
            } else {
                witness
            },
            num(v.margin)
        );
    }
    if let Some(t2) = data.critical_t2 {
        let _ = writeln!(report, "two-point critical t2* = {t2}");
    }
    let files = vec![csv.finish()?];
    Ok(Outcome {
        data,
        report,
        files,
    })
}
