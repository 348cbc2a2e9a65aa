//! Lower bound on the admissible decay rate as a function of the initial
//! step size.

use std::path::Path;

use robust_lowrank::solver::{rho_curve, RhoPoint};
use serde::{Deserialize, Serialize};

use crate::csvio::Table;
use crate::error::{ExpError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatecurveConfig {
    pub alpha: f64,
    pub tau: f64,
    pub kappa: f64,
    pub dist0: f64,
    pub mu0_lo: f64,
    pub mu0_hi: f64,
    pub points: usize,
}

impl Default for RatecurveConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            tau: 1.0,
            kappa: 1.0,
            dist0: 0.3,
            mu0_lo: 0.0,
            mu0_hi: 0.5,
            points: 501,
        }
    }
}

pub fn run(cfg: &RatecurveConfig) -> Result<Vec<RhoPoint>> {
    if cfg.points == 0 {
        return Err(ExpError::config("rate curve needs at least one point"));
    }
    let h = if cfg.points > 1 {
        (cfg.mu0_hi - cfg.mu0_lo) / (cfg.points - 1) as f64
    } else {
        0.0
    };
    let grid: Vec<f64> = (0..cfg.points).map(|i| cfg.mu0_lo + h * i as f64).collect();
    Ok(rho_curve(cfg.alpha, cfg.tau, cfg.kappa, cfg.dist0, &grid))
}

/// Inadmissible step sizes leave `rho_lower` empty.
pub fn table(points: &[RhoPoint]) -> Table {
    let mut table = Table::new(vec!["mu0".into(), "rho_lower".into(), "dist0_bar".into()]);
    for pt in points {
        table
            .rows
            .push(vec![Some(pt.mu0), pt.rho_lower, Some(pt.dist0_bar)]);
    }
    table
}

pub fn write(path: impl AsRef<Path>, points: &[RhoPoint]) -> Result<()> {
    table(points).write(path)
}

/// The admissible point with the smallest lower bound.
pub fn minimum(points: &[RhoPoint]) -> Option<&RhoPoint> {
    points
        .iter()
        .filter(|pt| pt.rho_lower.is_some())
        .min_by(|a, b| a.rho_lower.unwrap().total_cmp(&b.rho_lower.unwrap()))
}
