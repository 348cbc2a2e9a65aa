//! Distance traces of SubGM under each step-size schedule on the standard
//! instance.

use std::path::Path;

use robust_lowrank::objectives::L1Psd;
use robust_lowrank::solver::{SolverTrace, StepSchedule};
use serde::{Deserialize, Serialize};

use super::{psd_instance, solve_from_random};
use crate::config::Scale;
use crate::csvio::Table;
use crate::error::{ExpError, Result};
use crate::pool::run_parallel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSchedule {
    pub label: String,
    pub schedule: StepSchedule,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergeConfig {
    pub n: usize,
    pub r: usize,
    pub m_over_nr: f64,
    pub p: f64,
    pub iters: usize,
    pub init_scale: f64,
    pub seed: u64,
    pub runs: Vec<LabeledSchedule>,
}

fn labeled(label: String, schedule: StepSchedule) -> LabeledSchedule {
    LabeledSchedule { label, schedule }
}

/// Geometric rates 0.9–0.99 from `mu0 = 1`, Polyak, piecewise halving with
/// periods 50/100/200, and backtracking.
pub fn default_runs() -> Vec<LabeledSchedule> {
    let mut runs = Vec::new();
    for rho in [0.9, 0.93, 0.96, 0.99] {
        runs.push(labeled(
            format!("geometric_rho{rho}"),
            StepSchedule::Geometric { mu0: 1.0, rho },
        ));
    }
    runs.push(labeled(
        "polyak".into(),
        StepSchedule::Polyak { f_star: None },
    ));
    for period in [50, 100, 200] {
        runs.push(labeled(
            format!("piecewise_n{period}"),
            StepSchedule::PiecewiseGeometric {
                mu_top: 1.0,
                factor: 0.5,
                period,
            },
        ));
    }
    runs.push(labeled(
        "backtracking".into(),
        StepSchedule::Backtracking {
            eta: 1e-3,
            rho: 0.85,
            mu0: 1.0,
            literal: false,
        },
    ));
    runs
}

impl ConvergeConfig {
    pub fn defaults(scale: Scale, seed: u64) -> Self {
        Self {
            n: scale.n(),
            r: scale.r(),
            m_over_nr: 5.0,
            p: 0.3,
            iters: 1000,
            init_scale: 1.0,
            seed,
            runs: default_runs(),
        }
    }
}

pub struct ConvergeResult {
    pub labels: Vec<String>,
    pub traces: Vec<SolverTrace>,
}

impl ConvergeResult {
    /// `k` followed by one distance column per run; runs that stop early
    /// leave trailing cells empty.
    pub fn table(&self) -> Table {
        let mut headers = vec!["k".to_string()];
        headers.extend(self.labels.iter().cloned());
        let mut table = Table::new(headers);
        let len = self
            .traces
            .iter()
            .map(|t| t.records.len())
            .max()
            .unwrap_or(0);
        for k in 0..len {
            let mut row = vec![Some(k as f64)];
            for t in &self.traces {
                row.push(t.records.get(k).and_then(|rec| rec.dist));
            }
            table.rows.push(row);
        }
        table
    }
}

pub fn run(cfg: &ConvergeConfig, workers: usize) -> Result<ConvergeResult> {
    if cfg.runs.is_empty() {
        return Err(ExpError::config("no schedules to run"));
    }
    let inst = psd_instance(cfg.n, cfg.r, cfg.m_over_nr, cfg.p, cfg.seed)?;
    let objective = L1Psd::from_instance(&inst)?;
    let f_star = inst.optimal_l1_value();
    let runs: Vec<StepSchedule> = cfg
        .runs
        .iter()
        .map(|r| r.schedule.clone().with_default_f_star(f_star))
        .collect();
    for s in &runs {
        s.validate()?;
    }
    let traces = run_parallel(workers, runs, |schedule| {
        solve_from_random(
            &inst,
            &objective,
            &schedule,
            cfg.iters,
            1,
            cfg.init_scale,
            cfg.seed,
        )
    })?;
    Ok(ConvergeResult {
        labels: cfg.runs.iter().map(|r| r.label.clone()).collect(),
        traces,
    })
}

pub fn write(path: impl AsRef<Path>, result: &ConvergeResult) -> Result<()> {
    result.table().write(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule_set() {
        let runs = default_runs();
        assert_eq!(runs.len(), 9);
        assert!(runs.iter().all(|r| r.schedule.validate().is_ok()));
    }

    #[test]
    fn table_has_one_column_per_run() {
        let mut cfg = ConvergeConfig::defaults(Scale::Small, 1);
        cfg.n = 5;
        cfg.r = 1;
        cfg.iters = 20;
        cfg.runs.truncate(2);
        let result = run(&cfg, 1).unwrap();
        let table = result.table();
        assert_eq!(
            table.headers,
            vec!["k", "geometric_rho0.9", "geometric_rho0.93"]
        );
        assert_eq!(table.rows.len(), 21);
    }
}
