//! `-log` of the l1 and l2 losses over a plane through the rank-one
//! ground truth, for a few outlier ratios.

use std::path::Path;

use nalgebra::DMatrix;
use robust_lowrank::objectives::{landscape_slice, LandscapeGrid, Loss, SliceSpec, DEFAULT_CAP};
use robust_lowrank::operators::{generate_with_factors, ProblemConfig};
use serde::{Deserialize, Serialize};

use crate::csvio::Table;
use crate::error::{ExpError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandscapeConfig {
    pub ps: Vec<f64>,
    pub m: usize,
    pub ustar: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub cap: f64,
    pub seed: u64,
}

impl LandscapeConfig {
    pub fn defaults(seed: u64) -> Self {
        Self {
            ps: vec![0.0, 0.05, 0.1],
            m: 40,
            ustar: vec![0.5, 0.5],
            lo: -1.0,
            hi: 1.0,
            points: 81,
            cap: DEFAULT_CAP,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandscapePanel {
    pub p: f64,
    pub loss: Loss,
    /// Grid point of the largest `-log loss`.
    pub argmax: (f64, f64),
    /// The argmax lies within one grid cell of `U*` or `-U*`.
    pub at_truth: bool,
    #[serde(skip)]
    pub grid: Option<LandscapeGrid>,
}

impl LandscapePanel {
    pub fn file_name(&self) -> String {
        let loss = match self.loss {
            Loss::L1 => "l1",
            Loss::L2 => "l2",
        };
        format!("landscape_{loss}_p{:.2}.csv", self.p)
    }
}

/// Whether `(a, b)` lies within `h` of `±ustar` in both coordinates.
pub fn near_sign_orbit(a: f64, b: f64, ustar: (f64, f64), h: f64) -> bool {
    let tol = h * (1.0 + 1e-9);
    [1.0, -1.0]
        .iter()
        .any(|s| (a - s * ustar.0).abs() <= tol && (b - s * ustar.1).abs() <= tol)
}

pub fn run(cfg: &LandscapeConfig) -> Result<Vec<LandscapePanel>> {
    if cfg.ps.is_empty() || cfg.points < 2 {
        return Err(ExpError::config("landscape grid is empty"));
    }
    if cfg.ustar.len() != 2 {
        return Err(ExpError::config(
            "landscape ground truth must have two entries",
        ));
    }
    let ustar = DMatrix::from_column_slice(2, 1, &cfg.ustar);
    let spec = SliceSpec::square(cfg.lo, cfg.hi, cfg.points);
    let h = (cfg.hi - cfg.lo) / (cfg.points - 1) as f64;
    let mut panels = Vec::new();
    for &p in &cfg.ps {
        // Same seed for every p: the outlier supports are nested.
        let inst = generate_with_factors(
            &ProblemConfig::psd(2, 1, p, cfg.m, cfg.seed),
            ustar.clone(),
            None,
        )?;
        for loss in [Loss::L1, Loss::L2] {
            let grid = landscape_slice(&inst, &spec, loss, cfg.cap)?;
            let (i, j) = grid.argmax();
            let argmax = (grid.axis1[i], grid.axis2[j]);
            panels.push(LandscapePanel {
                p,
                loss,
                argmax,
                at_truth: near_sign_orbit(argmax.0, argmax.1, (cfg.ustar[0], cfg.ustar[1]), h),
                grid: Some(grid),
            });
        }
    }
    Ok(panels)
}

pub fn table(grid: &LandscapeGrid) -> Table {
    let mut table = Table::new(vec!["u1".into(), "u2".into(), "neglogloss".into()]);
    for (a, b, v) in grid.rows() {
        table.rows.push(vec![Some(a), Some(b), Some(v)]);
    }
    table
}

/// One CSV per panel plus `landscape_summary.json`.
pub fn write(dir: impl AsRef<Path>, panels: &[LandscapePanel]) -> Result<()> {
    let dir = dir.as_ref();
    for panel in panels {
        if let Some(grid) = &panel.grid {
            table(grid).write(dir.join(panel.file_name()))?;
        }
    }
    let summary = serde_json::to_string_pretty(panels)?;
    std::fs::write(dir.join("landscape_summary.json"), summary)?;
    Ok(())
}
