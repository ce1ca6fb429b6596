use rayon::prelude::*;
use serde::Serialize;

use super::engine::{simulate_with, validate_profile, SimOptions};
use super::Strategy;
use crate::error::{Error, Result};
use crate::model::GameSpec;

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    /// Sample standard deviation; zero for a single observation.
    pub stdev: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Stats {
    /// Summation runs in slice order, so equal inputs give bitwise-equal stats.
    pub fn from_samples(xs: &[f64]) -> Stats {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let stdev = var.sqrt();
        let stderr = stdev / n.sqrt();
        Stats {
            mean,
            stdev,
            stderr,
            ci_low: mean - Z_95 * stderr,
            ci_high: mean + Z_95 * stderr,
        }
    }

    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn within(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub makespan: f64,
    pub rewards: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchSummary {
    pub reps: usize,
    pub seed: u64,
    pub makespan: Stats,
    pub rewards: Vec<Stats>,
    /// Per-replication outcomes in replication order.
    pub runs: Vec<RunRecord>,
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return Err(Error::NonPositiveParameter {
            name: "reps".into(),
            value: 0.0,
        });
    }
    Ok(())
}

/// Replication `k` runs on stream `k` of `master_seed`; replications run in
/// parallel and are aggregated in replication order.
pub fn run_batch(
    g: &GameSpec,
    profile: &[Strategy],
    reps: usize,
    master_seed: u64,
) -> Result<BatchSummary> {
    check_reps(reps)?;
    validate_profile(g, profile)?;
    let opts = SimOptions::default();
    let runs: Vec<RunRecord> = (0..reps as u64)
        .into_par_iter()
        .map(|k| {
            let r = simulate_with(g, profile, master_seed, k, &opts)?;
            Ok(RunRecord {
                makespan: r.makespan,
                rewards: r.rewards,
            })
        })
        .collect::<Result<_>>()?;
    let makespans: Vec<f64> = runs.iter().map(|r| r.makespan).collect();
    let rewards = (0..g.n())
        .map(|i| Stats::from_samples(&runs.iter().map(|r| r.rewards[i]).collect::<Vec<_>>()))
        .collect();
    Ok(BatchSummary {
        reps,
        seed: master_seed,
        makespan: Stats::from_samples(&makespans),
        rewards,
        runs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationEstimate {
    pub agent: usize,
    pub reps: usize,
    pub seed: u64,
    /// Agent's payoff when everyone plays PPS with herding.
    pub pps: Stats,
    /// Agent's payoff when it alone plays the deviation.
    pub deviation: Stats,
    /// Paired difference `deviation - pps`.
    pub gain: Stats,
}

/// Paired comparison: both runs of replication `k` use stream `k`.
pub fn estimate_deviation_gain(
    g: &GameSpec,
    agent: usize,
    deviation: &Strategy,
    reps: usize,
    master_seed: u64,
) -> Result<DeviationEstimate> {
    if g.n() < 2 {
        return Err(Error::SingleAgent);
    }
    if agent >= g.n() {
        return Err(Error::UnknownAgent(agent.to_string()));
    }
    check_reps(reps)?;
    let baseline = vec![Strategy::PpsHerding; g.n()];
    let mut deviating = baseline.clone();
    deviating[agent] = deviation.clone();
    validate_profile(g, &deviating)?;
    let opts = SimOptions::default();
    let pairs: Vec<(f64, f64)> = (0..reps as u64)
        .into_par_iter()
        .map(|k| {
            let a = simulate_with(g, &baseline, master_seed, k, &opts)?;
            let b = simulate_with(g, &deviating, master_seed, k, &opts)?;
            Ok((a.rewards[agent], b.rewards[agent]))
        })
        .collect::<Result<_>>()?;
    let pps: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let dev: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let gain: Vec<f64> = pairs.iter().map(|p| p.1 - p.0).collect();
    Ok(DeviationEstimate {
        agent,
        reps,
        seed: master_seed,
        pps: Stats::from_samples(&pps),
        deviation: Stats::from_samples(&dev),
        gain: Stats::from_samples(&gain),
    })
}
