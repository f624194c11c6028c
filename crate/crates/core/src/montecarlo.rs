//! Lifetime simulation: an independent stochastic check on [`crate::analytic`].
//!
//! Every trial draws one exponential lifetime per instance and pushes them
//! through the block tree (series = min, parallel = max). Random numbers come
//! from ChaCha8 keyed by the seed; the draw for instance slot `i` of trial `k`
//! is the 64-bit word at position `k * n + i` of the keystream (`n` = number
//! of instances), so it depends only on `(seed, trial, instance)`. Trials are
//! grouped into fixed-size chunks that run in parallel; chunk results are
//! combined in chunk order, so estimates are bit-identical for any thread
//! count.

use std::collections::HashMap;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::analytic::{compile_valid, MissionTime};
use crate::model::{InstanceId, ModelError, SlotTree, SystemModel};
use crate::{Error, Result};

const CHUNK_TRIALS: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub trials: u64,
    pub seed: u64,
    pub confidence_level: f64,
}

impl SimulationConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            confidence_level: 0.95,
        }
    }

    pub fn with_confidence_level(mut self, level: f64) -> Self {
        self.confidence_level = level;
        self
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::Config(format!(
                "confidence level must lie in (0, 1), got {}",
                self.confidence_level
            )));
        }
        Ok(())
    }

    /// Two-sided normal quantile for the configured level.
    fn z(&self) -> f64 {
        Normal::standard().inverse_cdf(0.5 + 0.5 * self.confidence_level)
    }
}

/// A simulated survival probability with its normal-approximation interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityEstimate {
    pub point: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub seed: u64,
}

impl ReliabilityEstimate {
    fn from_count(survivors: u64, cfg: &SimulationConfig) -> Self {
        let n = cfg.trials as f64;
        let point = survivors as f64 / n;
        let std_error = (point * (1.0 - point) / n).sqrt();
        let half = cfg.z() * std_error;
        Self {
            point,
            std_error,
            ci_low: (point - half).clamp(0.0, point),
            ci_high: (point + half).clamp(point, 1.0),
            trials: cfg.trials,
            seed: cfg.seed,
        }
    }
}

/// A simulated mean lifetime. `mean` is infinite when some trial never fails.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifetimeEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Inverse-CDF draw from Exp(λ): −ln(u)/λ. λ = 0 gives `f64::INFINITY`.
pub fn sample_lifetime(failure_rate: f64, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("uniform variate must lie in (0, 1), got {u}")));
    }
    if !(failure_rate.is_finite() && failure_rate >= 0.0) {
        return Err(Error::Domain(format!(
            "failure rate must be finite and >= 0, got {failure_rate}"
        )));
    }
    Ok(draw(failure_rate, u))
}

#[inline]
fn draw(failure_rate: f64, u: f64) -> f64 {
    if failure_rate == 0.0 {
        f64::INFINITY
    } else {
        -u.ln() / failure_rate
    }
}

/// System lifetime given every instance's lifetime.
pub fn system_lifetime(model: &SystemModel, lifetimes: &HashMap<InstanceId, f64>) -> Result<f64> {
    let tree = compile_valid(model)?;
    let slots = tree
        .instances
        .iter()
        .map(|id| {
            lifetimes
                .get(id)
                .copied()
                .ok_or_else(|| ModelError::MissingInstance(id.clone()))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(tree.root.lifetime(&slots))
}

/// Keyed source of per-trial uniforms.
#[derive(Clone)]
struct TrialStream {
    rng: ChaCha8Rng,
}

impl TrialStream {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Positions the stream at the first draw of trial `k`.
    fn seek(&mut self, k: u64, instances: usize) {
        // Word positions count 32-bit words; each draw consumes two.
        self.rng.set_word_pos(2 * u128::from(k) * instances as u128);
    }

    /// Fills `lifetimes` with the next trial's draws.
    fn fill(&mut self, rates: &[f64], lifetimes: &mut [f64]) {
        for (l, &rate) in lifetimes.iter_mut().zip(rates) {
            let u: f64 = self.rng.sample(Open01);
            *l = draw(rate, u);
        }
    }
}

/// Runs `per_trial` over every trial, chunk by chunk, and returns the chunk
/// accumulators in chunk order.
fn run_chunks<A, F>(tree: &SlotTree, cfg: &SimulationConfig, init: A, per_trial: F) -> Vec<A>
where
    A: Clone + Send + Sync,
    F: Fn(&mut A, f64) + Sync,
{
    let chunks = cfg.trials.div_ceil(CHUNK_TRIALS);
    let base = TrialStream::new(cfg.seed);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut stream = base.clone();
            let mut acc = init.clone();
            let mut lifetimes = vec![0.0; tree.failure_rates.len()];
            let (start, end) = (c * CHUNK_TRIALS, ((c + 1) * CHUNK_TRIALS).min(cfg.trials));
            stream.seek(start, lifetimes.len());
            for _ in start..end {
                stream.fill(&tree.failure_rates, &mut lifetimes);
                per_trial(&mut acc, tree.root.lifetime(&lifetimes));
            }
            acc
        })
        .collect()
}

/// Fraction of trials whose system lifetime exceeds `t`.
pub fn estimate_reliability(
    model: &SystemModel,
    t: MissionTime,
    cfg: &SimulationConfig,
) -> Result<ReliabilityEstimate> {
    Ok(estimate_survival_curve(model, &[t], cfg)?[0])
}

/// Survival estimates on a time grid from one set of trials (common random
/// numbers), so the curve is nonincreasing in `t`.
pub fn estimate_survival_curve(
    model: &SystemModel,
    times: &[MissionTime],
    cfg: &SimulationConfig,
) -> Result<Vec<ReliabilityEstimate>> {
    cfg.check()?;
    let tree = compile_valid(model)?;
    let grid: Vec<f64> = times.iter().map(|t| t.as_hours()).collect();
    let counts = run_chunks(&tree, cfg, vec![0u64; grid.len()], |acc, life| {
        for (n, &t) in acc.iter_mut().zip(&grid) {
            *n += u64::from(life > t);
        }
    });
    let mut totals = vec![0u64; grid.len()];
    for chunk in counts {
        for (tot, n) in totals.iter_mut().zip(chunk) {
            *tot += n;
        }
    }
    Ok(totals
        .into_iter()
        .map(|n| ReliabilityEstimate::from_count(n, cfg))
        .collect())
}

/// Mean system lifetime over the trials.
pub fn estimate_mttf(model: &SystemModel, cfg: &SimulationConfig) -> Result<LifetimeEstimate> {
    cfg.check()?;
    let tree = compile_valid(model)?;
    let sums = run_chunks(&tree, cfg, (0.0f64, 0.0f64), |(s, s2), life| {
        *s += life;
        *s2 += life * life;
    });
    let (sum, sum_sq) = sums.into_iter().fold((0.0, 0.0), |(a, b), (s, s2)| (a + s, b + s2));
    let n = cfg.trials as f64;
    let mean = sum / n;
    if !mean.is_finite() {
        return Ok(LifetimeEstimate {
            mean: f64::INFINITY,
            std_error: f64::INFINITY,
            ci_low: f64::INFINITY,
            ci_high: f64::INFINITY,
            trials: cfg.trials,
            seed: cfg.seed,
        });
    }
    let var = if cfg.trials > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    let std_error = (var / n).sqrt();
    let half = cfg.z() * std_error;
    Ok(LifetimeEstimate {
        mean,
        std_error,
        ci_low: mean - half,
        ci_high: mean + half,
        trials: cfg.trials,
        seed: cfg.seed,
    })
}
