//! Success-rate map over outlier ratio and measurement budget.

use std::path::Path;

use robust_lowrank::init::random_init;
use robust_lowrank::metrics::{recovery_report, DEFAULT_SUCCESS_THRESHOLD};
use robust_lowrank::objectives::{L1Psd, L2Psd};
use robust_lowrank::solver::{gradient_descent, subgm, SolveOptions, StepSchedule};
use serde::{Deserialize, Serialize};

use super::psd_instance;
use crate::config::Scale;
use crate::csvio::write_records;
use crate::error::{ExpError, Result};
use crate::pool::run_parallel;
use crate::seeds::trial_seed;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub n: usize,
    pub r: usize,
    pub ps: Vec<f64>,
    pub ratios: Vec<f64>,
    pub trials: usize,
    pub iters: usize,
    pub mu0: f64,
    pub rho: f64,
    pub seed: u64,
    pub threshold: f64,
    /// Also run fixed-step gradient descent on the l2 loss.
    pub baseline_l2: bool,
    pub l2_step: f64,
}

impl PhaseConfig {
    pub fn defaults(scale: Scale, seed: u64) -> Self {
        Self {
            n: scale.n(),
            r: scale.r(),
            ps: (0..=10).map(|i| i as f64 / 20.0).collect(),
            ratios: (2..=7).map(f64::from).collect(),
            trials: scale.trials(),
            iters: 2000,
            mu0: 1.0,
            rho: 0.99,
            seed,
            threshold: DEFAULT_SUCCESS_THRESHOLD,
            baseline_l2: false,
            l2_step: 1e-3,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.ps.is_empty() || self.ratios.is_empty() {
            return Err(ExpError::config("phase grid is empty"));
        }
        if self.trials == 0 {
            return Err(ExpError::config("trials must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub p: f64,
    pub m_over_nr: f64,
    pub success_rate: f64,
    pub trials: usize,
}

pub struct PhaseResult {
    pub subgm: Vec<PhaseCell>,
    pub l2: Option<Vec<PhaseCell>>,
}

struct Outcome {
    subgm: bool,
    l2: bool,
}

fn trial(cfg: &PhaseConfig, p: f64, ratio: f64, seed: u64) -> Result<Outcome> {
    let inst = psd_instance(cfg.n, cfg.r, ratio, p, seed)?;
    let u0 = random_init(cfg.n, cfg.r, 1.0, seed);
    let opts = SolveOptions::new(cfg.iters).stride(cfg.iters);
    let succeeded = |u: &nalgebra::DMatrix<f64>| -> Result<bool> {
        let x = u * u.transpose();
        if x.iter().any(|v| !v.is_finite()) {
            return Ok(false);
        }
        Ok(recovery_report(&x, &inst.xstar, cfg.threshold)?.success)
    };

    let schedule = StepSchedule::Geometric {
        mu0: cfg.mu0,
        rho: cfg.rho,
    };
    let trace = subgm(&L1Psd::from_instance(&inst)?, &u0, &schedule, &opts)?;
    let subgm_ok = succeeded(&trace.x)?;

    let l2_ok = if cfg.baseline_l2 {
        let trace = gradient_descent(&L2Psd::from_instance(&inst)?, &u0, cfg.l2_step, &opts)?;
        succeeded(&trace.x)?
    } else {
        false
    };
    Ok(Outcome {
        subgm: subgm_ok,
        l2: l2_ok,
    })
}

/// Runs every trial of every cell in parallel; each trial's seed depends
/// only on its grid position.
pub fn run(cfg: &PhaseConfig, workers: usize) -> Result<PhaseResult> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for (pi, &p) in cfg.ps.iter().enumerate() {
        for (mi, &ratio) in cfg.ratios.iter().enumerate() {
            for t in 0..cfg.trials {
                jobs.push((pi, mi, p, ratio, trial_seed(cfg.seed, pi, mi, t)));
            }
        }
    }
    let outcomes = run_parallel(workers, jobs, |(_, _, p, ratio, seed)| {
        trial(cfg, p, ratio, seed)
    })?;

    let cells = |pick: fn(&Outcome) -> bool| -> Vec<PhaseCell> {
        let mut out = Vec::new();
        let mut chunks = outcomes.chunks(cfg.trials);
        for &p in &cfg.ps {
            for &ratio in &cfg.ratios {
                let chunk = chunks.next().expect("one chunk per cell");
                let wins = chunk.iter().filter(|o| pick(o)).count();
                out.push(PhaseCell {
                    p,
                    m_over_nr: ratio,
                    success_rate: wins as f64 / cfg.trials as f64,
                    trials: cfg.trials,
                });
            }
        }
        out
    };
    Ok(PhaseResult {
        subgm: cells(|o| o.subgm),
        l2: cfg.baseline_l2.then(|| cells(|o| o.l2)),
    })
}

pub fn write(path: impl AsRef<Path>, cells: &[PhaseCell]) -> Result<()> {
    write_records(path, cells)
}

/// Success rate of the cell at `(p, m_over_nr)`.
pub fn lookup(cells: &[PhaseCell], p: f64, m_over_nr: f64) -> Option<f64> {
    cells
        .iter()
        .find(|c| (c.p - p).abs() < 1e-9 && (c.m_over_nr - m_over_nr).abs() < 1e-9)
        .map(|c| c.success_rate)
}

/// Largest number of monotonicity breaks in any row (rate should not rise
/// with p) and any column (rate should not fall with m).
pub fn max_inversions(cells: &[PhaseCell]) -> (usize, usize) {
    let mut ps: Vec<f64> = cells.iter().map(|c| c.p).collect();
    let mut ms: Vec<f64> = cells.iter().map(|c| c.m_over_nr).collect();
    for v in [&mut ps, &mut ms] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let rate = |p: f64, m: f64| lookup(cells, p, m);
    let mut along_p = 0;
    for &m in &ms {
        let rates: Vec<f64> = ps.iter().filter_map(|&p| rate(p, m)).collect();
        along_p = along_p.max(rates.windows(2).filter(|w| w[1] > w[0]).count());
    }
    let mut along_m = 0;
    for &p in &ps {
        let rates: Vec<f64> = ms.iter().filter_map(|&m| rate(p, m)).collect();
        along_m = along_m.max(rates.windows(2).filter(|w| w[1] < w[0]).count());
    }
    (along_p, along_m)
}
