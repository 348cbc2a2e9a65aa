//! Final distance over a grid of geometric-schedule parameters on one
//! fixed instance.

use std::path::Path;

use robust_lowrank::objectives::L1Psd;
use robust_lowrank::solver::{Status, StepSchedule};
use serde::{Deserialize, Serialize};

use super::{psd_instance, solve_from_random};
use crate::config::Scale;
use crate::csvio::write_records;
use crate::error::{ExpError, Result};
use crate::pool::run_parallel;

/// Distance recorded for diverged runs.
pub const DIVERGENCE_SENTINEL: f64 = 1e4;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepgridConfig {
    pub n: usize,
    pub r: usize,
    pub m_over_nr: f64,
    pub p: f64,
    pub iters: usize,
    pub mu0s: Vec<f64>,
    pub rhos: Vec<f64>,
    pub init_scale: f64,
    pub seed: u64,
}

impl StepgridConfig {
    pub fn defaults(scale: Scale, seed: u64) -> Self {
        Self {
            n: scale.n(),
            r: scale.r(),
            m_over_nr: 5.0,
            p: 0.3,
            iters: 10_000,
            mu0s: vec![0.1, 0.5, 1.0, 10.0],
            rhos: vec![0.90, 0.91, 0.92, 0.93, 0.94, 0.95, 0.96, 0.97, 0.98, 0.99],
            init_scale: 1.0,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepgridRow {
    pub mu0: f64,
    pub rho: f64,
    pub final_dist: f64,
}

#[derive(Debug, Clone)]
pub struct StepgridCell {
    pub mu0: f64,
    pub rho: f64,
    pub final_dist: f64,
    pub status: Status,
}

pub fn run(cfg: &StepgridConfig, workers: usize) -> Result<Vec<StepgridCell>> {
    if cfg.mu0s.is_empty() || cfg.rhos.is_empty() {
        return Err(ExpError::config("step grid is empty"));
    }
    let inst = psd_instance(cfg.n, cfg.r, cfg.m_over_nr, cfg.p, cfg.seed)?;
    let objective = L1Psd::from_instance(&inst)?;
    let mut cells = Vec::new();
    for &mu0 in &cfg.mu0s {
        for &rho in &cfg.rhos {
            StepSchedule::Geometric { mu0, rho }.validate()?;
            cells.push((mu0, rho));
        }
    }
    run_parallel(workers, cells, |(mu0, rho)| {
        let schedule = StepSchedule::Geometric { mu0, rho };
        let trace = solve_from_random(
            &inst,
            &objective,
            &schedule,
            cfg.iters,
            cfg.iters,
            cfg.init_scale,
            cfg.seed,
        )?;
        let final_dist = match trace.status {
            Status::Diverged => DIVERGENCE_SENTINEL,
            _ => trace.final_dist().unwrap_or(f64::NAN),
        };
        Ok(StepgridCell {
            mu0,
            rho,
            final_dist,
            status: trace.status,
        })
    })
}

pub fn write(path: impl AsRef<Path>, cells: &[StepgridCell]) -> Result<()> {
    let rows: Vec<StepgridRow> = cells
        .iter()
        .map(|c| StepgridRow {
            mu0: c.mu0,
            rho: c.rho,
            final_dist: c.final_dist,
        })
        .collect();
    write_records(path, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_grid_runs_and_flags_divergence() {
        let mut cfg = StepgridConfig::defaults(Scale::Small, 3);
        cfg.n = 6;
        cfg.r = 1;
        cfg.iters = 300;
        cfg.mu0s = vec![1e3, 0.5];
        cfg.rhos = vec![0.95];
        let cells = run(&cfg, 2).unwrap();
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0].status, Status::Diverged);
        assert_eq!(cells[0].final_dist, DIVERGENCE_SENTINEL);
        assert!(cells[1].final_dist.is_finite());
    }

    #[test]
    fn empty_grid_is_a_config_error() {
        let mut cfg = StepgridConfig::defaults(Scale::Small, 0);
        cfg.rhos.clear();
        assert_eq!(run(&cfg, 1).unwrap_err().exit_code(), 2);
    }
}
