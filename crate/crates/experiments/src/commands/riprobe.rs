//! Empirical l1/l2-RIP deviation against the measurement budget.

use std::path::Path;

use robust_lowrank::linalg::median;
use robust_lowrank::operators::{estimate_rip_delta, gaussian_operator, RipEstimate};
use robust_lowrank::rng::derive_key;
use robust_lowrank::rng::tag;
use serde::{Deserialize, Serialize};

use crate::config::{measurements, Scale};
use crate::error::{ExpError, Result};
use crate::pool::run_parallel;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiprobeConfig {
    pub n: usize,
    pub r: usize,
    pub ratios: Vec<f64>,
    pub samples: usize,
    pub operator_seeds: usize,
    pub seed: u64,
}

impl RiprobeConfig {
    pub fn defaults(scale: Scale, seed: u64) -> Self {
        Self {
            n: scale.n(),
            r: scale.r(),
            ratios: vec![2.0, 4.0, 6.0, 8.0, 10.0],
            samples: 200,
            operator_seeds: 5,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RipPoint {
    pub m_over_nr: f64,
    pub m: usize,
    pub median_delta_hat: f64,
    pub median_mean: f64,
    pub estimates: Vec<RipEstimate>,
}

fn operator_seed(base: u64, ratio_idx: usize, k: usize) -> u64 {
    derive_key(&[base, tag::RIP_PROBE, ratio_idx as u64, k as u64])
}

pub fn run(cfg: &RiprobeConfig, workers: usize) -> Result<Vec<RipPoint>> {
    if cfg.ratios.is_empty() || cfg.operator_seeds == 0 {
        return Err(ExpError::config("RIP probe grid is empty"));
    }
    let mut jobs = Vec::new();
    for (i, &ratio) in cfg.ratios.iter().enumerate() {
        let m = measurements(ratio, cfg.n, cfg.r)?;
        for k in 0..cfg.operator_seeds {
            jobs.push((m, operator_seed(cfg.seed, i, k)));
        }
    }
    let estimates = run_parallel(workers, jobs, |(m, seed)| {
        let op = gaussian_operator(cfg.n, cfg.n, m, seed)?;
        Ok(estimate_rip_delta(&op, cfg.r, cfg.samples, seed)?)
    })?;
    let points = cfg
        .ratios
        .iter()
        .zip(estimates.chunks(cfg.operator_seeds))
        .map(|(&ratio, chunk)| {
            let deltas: Vec<f64> = chunk.iter().map(|e| e.delta_hat).collect();
            let means: Vec<f64> = chunk.iter().map(|e| e.mean).collect();
            Ok(RipPoint {
                m_over_nr: ratio,
                m: measurements(ratio, cfg.n, cfg.r)?,
                median_delta_hat: median(&deltas).unwrap_or(f64::NAN),
                median_mean: median(&means).unwrap_or(f64::NAN),
                estimates: chunk.to_vec(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(points)
}

pub fn write(path: impl AsRef<Path>, points: &[RipPoint]) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(points)?)?;
    Ok(())
}
