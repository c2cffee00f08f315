//! Sample-mean PAoI estimates with batch-means confidence intervals.
//!
//! Consecutive peaks share a service-time term (`A_{k+1}` and `A_k` both
//! involve `X̌_k`), so the i.i.d. standard error is biased. Batch means on
//! contiguous blocks absorb the short-range dependence.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::simulator::PeakRecord;

pub const DEFAULT_BATCHES: usize = 30;
/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PaoiEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub ci95: (f64, f64),
    pub peak_count: usize,
    pub seed: u64,
}

impl PaoiEstimate {
    fn new(mean: f64, std_error: f64, peak_count: usize, seed: u64) -> Self {
        Self {
            mean,
            std_error,
            ci95: (mean - Z_95 * std_error, mean + Z_95 * std_error),
            peak_count,
            seed,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci95.0 <= value && value <= self.ci95.1
    }
}

/// Batch-means estimate over a plain series of values.
///
/// Uses `min(batches, n)` equal batches; trailing values that do not fill a
/// batch still count towards the mean.
pub fn batch_means(values: &[f64], batches: usize, seed: u64) -> Result<PaoiEstimate> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewPeaks { needed: 2, got: n });
    }
    let batches = batches.clamp(2, n);
    let size = n / batches;
    let mean = values.iter().sum::<f64>() / n as f64;
    let batch_avgs: Vec<f64> = values
        .chunks_exact(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let grand = batch_avgs.iter().sum::<f64>() / batches as f64;
    let var = batch_avgs.iter().map(|b| (b - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    Ok(PaoiEstimate::new(
        mean,
        (var / batches as f64).sqrt(),
        n,
        seed,
    ))
}

/// Estimate of the average PAoI from a simulated peak series.
pub fn estimate_paoi(peaks: &[PeakRecord], seed: u64) -> Result<PaoiEstimate> {
    let values: Vec<f64> = peaks.iter().map(|p| p.peak).collect();
    batch_means(&values, DEFAULT_BATCHES, seed)
}

/// Combines independent replication estimates: the average of the means
/// with standard error `sqrt(Σ se_r²) / R`.
pub fn pool(estimates: &[PaoiEstimate], seed: u64) -> PaoiEstimate {
    assert!(!estimates.is_empty(), "cannot pool zero replications");
    let r = estimates.len() as f64;
    let mean = estimates.iter().map(|e| e.mean).sum::<f64>() / r;
    let se = estimates
        .iter()
        .map(|e| e.std_error.powi(2))
        .sum::<f64>()
        .sqrt()
        / r;
    let peaks = estimates.iter().map(|e| e.peak_count).sum();
    PaoiEstimate::new(mean, se, peaks, seed)
}
