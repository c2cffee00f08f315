//! Sample-path simulation of the age process under preemptive policies.
//!
//! No event queue is needed with one source and one server. After every
//! reception the next request goes out immediately. Each attempt draws a
//! service time `X_n` and a threshold `θ_n`. The update is received if
//! `X_n ≤ θ_n` (ties go to reception). Otherwise it is preempted at `θ_n`,
//! `θ_n` is added to the inter-reception time, and a fresh request is sent.
//!
//! Time zero is a reception whose update had system time `X_0 ~ F`, so the
//! first peak is `A_1 = X_0 + Y_1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::Serialize;

use crate::analytic::ThresholdSequence;
use crate::distributions::ServiceDistribution;
use crate::error::{Error, Result};
use crate::estimate::{estimate_paoi, pool, PaoiEstimate};
use crate::par::{map_indexed, Execution};
use crate::policy::{Policy, ThresholdSampler};

/// Consecutive preemptions tolerated before a run is declared stalled.
pub const DEFAULT_STALL_LIMIT: u64 = 1_000_000_000;

/// Below this per-attempt success probability a constant threshold skips
/// the preempted attempts in one step instead of replaying them one by one.
/// Skipped runs are exempt from the stall limit: their threshold is already
/// known to be met with positive probability.
pub const FAST_FORWARD_BELOW: f64 = 0.01;

/// One AoI peak `A_k = Y_k + X̌_{k−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakRecord {
    /// 1-based peak index.
    pub k: usize,
    /// `A_k`, the age just before the `k`-th reception.
    pub peak: f64,
    /// `X̌_{k−1}`: system time of the update received at the previous reception.
    pub received_service: f64,
    /// `Y_k`: time between the previous and this reception.
    pub interreception: f64,
    /// Attempts preempted between the two receptions.
    pub preemption_count: u64,
    /// `D_{n_k}`: reception instant.
    pub receive_time: f64,
    /// `X̌_k`: system time of the update received now (the age drops to it).
    pub delivered_service: f64,
}

/// Source of service times and randomized thresholds for the event loop.
pub trait Draws {
    fn service(&mut self) -> f64;
    fn threshold(&mut self, sampler: &ThresholdSampler) -> f64;

    /// Jumps over a run of attempts under the constant threshold `theta`,
    /// whose success probability is `success = F(θ)`. Returns the number of
    /// preempted attempts and the service time of the received update, drawn
    /// from their exact joint law: `Geometric(success)` failures followed by
    /// `X | X ≤ θ`. Sources that can only replay attempts return `None`.
    fn skip_attempts(&mut self, _theta: f64, _success: f64) -> Option<(u64, f64)> {
        None
    }
}

/// Draws from a seeded ChaCha stream.
pub struct RandomDraws<'a> {
    dist: &'a ServiceDistribution,
    rng: ChaCha8Rng,
}

impl<'a> RandomDraws<'a> {
    pub fn new(dist: &'a ServiceDistribution, seed: u64) -> Self {
        Self {
            dist,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Draws for RandomDraws<'_> {
    fn service(&mut self) -> f64 {
        self.dist.sample(&mut self.rng)
    }

    fn threshold(&mut self, sampler: &ThresholdSampler) -> f64 {
        sampler.sample(&mut self.rng)
    }

    fn skip_attempts(&mut self, theta: f64, success: f64) -> Option<(u64, f64)> {
        let failures = Geometric::new(success).ok()?.sample(&mut self.rng);
        // Inverse transform restricted to [0, F(θ)]; u > 0 keeps the level
        // inside the quantile's domain.
        let u: f64 = 1.0 - self.rng.random::<f64>();
        let service = self.dist.quantile(u * success).min(theta);
        Some((failures, service))
    }
}

/// Replays a fixed list of service times; for hand-checked traces.
#[derive(Debug, Clone)]
pub struct ScriptedDraws {
    services: std::vec::IntoIter<f64>,
}

impl ScriptedDraws {
    pub fn new(services: Vec<f64>) -> Self {
        Self {
            services: services.into_iter(),
        }
    }
}

impl Draws for ScriptedDraws {
    fn service(&mut self) -> f64 {
        self.services
            .next()
            .expect("scripted service times exhausted")
    }

    fn threshold(&mut self, sampler: &ThresholdSampler) -> f64 {
        match sampler {
            ThresholdSampler::Point { theta } => *theta,
            other => panic!("scripted draws cannot sample {}", other.label()),
        }
    }
}

#[derive(Debug, Clone)]
enum ThresholdRule {
    Constant(f64),
    Sequence(ThresholdSequence),
    Random(ThresholdSampler),
}

impl ThresholdRule {
    fn from_policy(d: &ServiceDistribution, policy: &Policy) -> Result<Self> {
        policy.validate()?;
        if let Some(theta) = policy.constant_threshold(d) {
            return Ok(Self::Constant(theta));
        }
        Ok(match policy.resolve(d) {
            Policy::RepetitiveSequence(seq) => Self::Sequence(seq),
            Policy::RandomizedThreshold(sampler) => Self::Random(sampler),
            other => unreachable!("{} resolves to a constant threshold", other.label()),
        })
    }

    /// Threshold that applies forever once the rule is in its steady state.
    fn tail_threshold(&self) -> Option<f64> {
        match self {
            Self::Constant(theta) => Some(*theta),
            Self::Sequence(seq) => Some(seq.at(seq.len() - 1)),
            Self::Random(sampler) => Some(sampler.bounds().1),
        }
    }
}

/// Iterator over successive peaks of one sample path.
pub struct PeakProcess<D: Draws> {
    draws: D,
    rule: ThresholdRule,
    initial_age: f64,
    last_delivered: f64,
    clock: f64,
    k: usize,
    stall_limit: u64,
    /// `F(θ)` for a constant threshold that is rarely met.
    rare_success: Option<f64>,
}

impl<D: Draws> PeakProcess<D> {
    /// Starts a path whose initial age is drawn from the service law.
    pub fn new(d: &ServiceDistribution, policy: &Policy, mut draws: D) -> Result<Self> {
        let initial = draws.service();
        Self::with_initial_age(d, policy, draws, initial)
    }

    pub fn with_initial_age(
        d: &ServiceDistribution,
        policy: &Policy,
        draws: D,
        initial_age: f64,
    ) -> Result<Self> {
        let rule = ThresholdRule::from_policy(d, policy)?;
        // A steady-state threshold that no service time can meet stalls for
        // sure; report it without spinning through the stall limit.
        if let Some(theta) = rule.tail_threshold() {
            if d.cdf(theta) == 0.0 {
                return Err(Error::SimulationStall { preemptions: 0 });
            }
        }
        let rare_success = match rule {
            ThresholdRule::Constant(theta) => {
                Some(d.cdf(theta)).filter(|&f| f < FAST_FORWARD_BELOW)
            }
            _ => None,
        };
        Ok(Self {
            draws,
            rule,
            initial_age,
            last_delivered: initial_age,
            clock: 0.0,
            k: 0,
            stall_limit: DEFAULT_STALL_LIMIT,
            rare_success,
        })
    }

    pub fn stall_limit(mut self, limit: u64) -> Self {
        self.stall_limit = limit;
        self
    }

    /// `Δ(0)`, the system time of the update received at time zero.
    pub fn initial_age(&self) -> f64 {
        self.initial_age
    }

    pub fn next_peak(&mut self) -> Result<PeakRecord> {
        if let (Some(success), ThresholdRule::Constant(theta)) = (self.rare_success, &self.rule) {
            let theta = *theta;
            // F(θ) > 0 was checked up front, so a long run here is a rare
            // success rather than a stall; the counter limit does not apply.
            if let Some((preemptions, delivered)) = self.draws.skip_attempts(theta, success) {
                return Ok(self.record(preemptions as f64 * theta, preemptions, delivered));
            }
        }
        let mut elapsed = 0.0;
        let mut preemptions = 0u64;
        let delivered = loop {
            let theta = match &self.rule {
                ThresholdRule::Constant(theta) => *theta,
                ThresholdRule::Sequence(seq) => seq.at(preemptions as usize),
                ThresholdRule::Random(sampler) => self.draws.threshold(sampler),
            };
            let service = self.draws.service();
            if service <= theta {
                break service;
            }
            elapsed += theta;
            preemptions += 1;
            if preemptions >= self.stall_limit {
                return Err(Error::SimulationStall { preemptions });
            }
        };
        Ok(self.record(elapsed, preemptions, delivered))
    }

    fn record(&mut self, elapsed: f64, preemptions: u64, delivered: f64) -> PeakRecord {
        let interreception = elapsed + delivered;
        self.clock += interreception;
        self.k += 1;
        let record = PeakRecord {
            k: self.k,
            peak: interreception + self.last_delivered,
            received_service: self.last_delivered,
            interreception,
            preemption_count: preemptions,
            receive_time: self.clock,
            delivered_service: delivered,
        };
        self.last_delivered = delivered;
        record
    }
}

impl<D: Draws> Iterator for PeakProcess<D> {
    type Item = Result<PeakRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.next_peak())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    /// Leading peaks discarded before estimation.
    pub warmup: usize,
    pub stall_limit: u64,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            warmup: 0,
            stall_limit: DEFAULT_STALL_LIMIT,
        }
    }
}

/// Simulates `peaks` consecutive peaks (after `opts.warmup` discarded ones).
pub fn simulate_peaks(
    d: &ServiceDistribution,
    policy: &Policy,
    peaks: usize,
    seed: u64,
    opts: &SimulationOptions,
) -> Result<Vec<PeakRecord>> {
    assert!(peaks >= 1, "peak budget must be positive");
    let process =
        PeakProcess::new(d, policy, RandomDraws::new(d, seed))?.stall_limit(opts.stall_limit);
    process.skip(opts.warmup).take(peaks).collect()
}

/// One breakpoint of the sawtooth `Δ(t)`: the age jumps from `age_before`
/// down to `age_after` at reception instant `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgeBreakpoint {
    pub t: f64,
    pub age_before: f64,
    pub age_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgeTrajectory {
    /// `Δ(0) = X_0`.
    pub initial_age: f64,
    pub breakpoints: Vec<AgeBreakpoint>,
}

impl AgeTrajectory {
    /// `Δ(t)`: grows with slope one between receptions.
    pub fn age_at(&self, t: f64) -> f64 {
        let mut origin = (0.0, self.initial_age);
        for b in &self.breakpoints {
            if b.t > t {
                break;
            }
            origin = (b.t, b.age_after);
        }
        origin.1 + (t - origin.0)
    }
}

fn trajectory_from<D: Draws>(mut process: PeakProcess<D>, horizon: f64) -> Result<AgeTrajectory> {
    let initial_age = process.initial_age();
    let mut breakpoints = Vec::new();
    loop {
        let record = process.next_peak()?;
        if record.receive_time > horizon {
            break;
        }
        breakpoints.push(AgeBreakpoint {
            t: record.receive_time,
            age_before: record.peak,
            age_after: record.delivered_service,
        });
    }
    Ok(AgeTrajectory {
        initial_age,
        breakpoints,
    })
}

/// The age sample path up to `horizon`.
pub fn aoi_trajectory(
    d: &ServiceDistribution,
    policy: &Policy,
    horizon: f64,
    seed: u64,
) -> Result<AgeTrajectory> {
    assert!(horizon > 0.0, "horizon must be positive");
    trajectory_from(
        PeakProcess::new(d, policy, RandomDraws::new(d, seed))?,
        horizon,
    )
}

/// Same as [`aoi_trajectory`] with caller-provided draws and initial age.
pub fn aoi_trajectory_with<D: Draws>(
    d: &ServiceDistribution,
    policy: &Policy,
    draws: D,
    initial_age: f64,
    horizon: f64,
) -> Result<AgeTrajectory> {
    trajectory_from(
        PeakProcess::with_initial_age(d, policy, draws, initial_age)?,
        horizon,
    )
}

/// Simulates one replication and estimates its average PAoI.
pub fn simulate_estimate(
    d: &ServiceDistribution,
    policy: &Policy,
    peaks: usize,
    seed: u64,
    opts: &SimulationOptions,
) -> Result<PaoiEstimate> {
    estimate_paoi(&simulate_peaks(d, policy, peaks, seed, opts)?, seed)
}

/// Estimate under a randomized policy with i.i.d. thresholds from `sampler`.
pub fn simulate_randomized(
    d: &ServiceDistribution,
    sampler: &ThresholdSampler,
    peaks: usize,
    seed: u64,
) -> Result<PaoiEstimate> {
    simulate_estimate(
        d,
        &Policy::RandomizedThreshold(sampler.clone()),
        peaks,
        seed,
        &SimulationOptions::default(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Replications {
    pub estimates: Vec<PaoiEstimate>,
    pub pooled: PaoiEstimate,
}

/// Seed of replication `index` under `base_seed`.
pub fn replication_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(index as u64)
}

/// Independent replications (seeds `base_seed + r`) and their pooled estimate.
pub fn replicate(
    d: &ServiceDistribution,
    policy: &Policy,
    peaks: usize,
    replications: usize,
    base_seed: u64,
    opts: &SimulationOptions,
    exec: Execution,
) -> Result<Replications> {
    assert!(replications >= 1, "need at least one replication");
    let estimates = map_indexed(replications, exec, |r| {
        simulate_estimate(d, policy, peaks, replication_seed(base_seed, r), opts)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let pooled = pool(&estimates, base_seed);
    Ok(Replications { estimates, pooled })
}
