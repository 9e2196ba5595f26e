//! Percentile bootstrap with per-iteration ChaCha8 streams, so results do
//! not depend on thread scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::rng::SeededRng;

pub const DEFAULT_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub iterations: usize,
    pub seed: u64,
    /// Two-sided coverage, e.g. 0.95 for the 2.5th/97.5th percentiles.
    pub confidence: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
            confidence: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
    /// Resamples where the statistic was undefined.
    pub skipped: usize,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Resample indices `0..n` with replacement for iteration `i`.
pub fn resample_indices(n: usize, seed: u64, iteration: u64) -> Vec<usize> {
    let mut rng = SeededRng::with_stream(seed, iteration);
    (0..n).map(|_| rng.below(n)).collect()
}

/// `stat` returns `None` when undefined on a resample; those are skipped and
/// counted. The point estimate must be defined on the full data.
pub fn bootstrap_ci<T, F>(data: &[T], stat: F, config: &BootstrapConfig) -> Result<BootstrapCi, StatsError>
where
    T: Clone + Sync,
    F: Fn(&[T]) -> Option<f64> + Sync,
{
    if data.is_empty() {
        return Err(StatsError::EmptyData);
    }
    let estimate = stat(data).ok_or(StatsError::UndefinedEstimate)?;
    let n = data.len();
    let draws: Vec<Option<f64>> = (0..config.iterations as u64)
        .into_par_iter()
        .map(|i| {
            let sample: Vec<T> = resample_indices(n, config.seed, i).into_iter().map(|j| data[j].clone()).collect();
            stat(&sample).filter(|v| v.is_finite())
        })
        .collect();
    let mut values: Vec<f64> = draws.iter().flatten().copied().collect();
    let skipped = draws.len() - values.len();
    if values.is_empty() {
        return Err(StatsError::AllResamplesDegenerate {
            iterations: config.iterations,
        });
    }
    values.sort_by(f64::total_cmp);
    let tail = (1.0 - config.confidence) / 2.0;
    Ok(BootstrapCi {
        estimate,
        lo: quantile_sorted(&values, tail),
        hi: quantile_sorted(&values, 1.0 - tail),
        iterations: config.iterations,
        skipped,
    })
}
