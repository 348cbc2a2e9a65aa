//! `gen`, `init` and `solve`: one instance on disk, one run at a time.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use robust_lowrank::init::{initialize, InitConfig, InitKind, InitOutput, InitStatus};
use robust_lowrank::io::{load_instance, load_matrix, save_instance, save_matrix};
use robust_lowrank::linalg::vstack;
use robust_lowrank::metrics::{
    dist_to_orbit, dist_to_orbit_stacked, recovery_report, RecoveryReport,
    DEFAULT_SUCCESS_THRESHOLD,
};
use robust_lowrank::objectives::{lambda_recommended, L1General, L1Psd, Objective};
use robust_lowrank::operators::{generate_problem, ProblemConfig, ProblemInstance};
use robust_lowrank::solver::{subgm, SolveOptions, SolverTrace, Status, StepSchedule};
use serde::{Deserialize, Serialize};

use crate::config::{measurements, Scale};
use crate::csvio::write_records;
use crate::error::{ExpError, Result};

/// Default problem for `gen`: PSD, `m = 5nr`, `p = 0.3`.
pub fn default_problem(scale: Scale, seed: u64) -> Result<ProblemConfig> {
    let (n, r) = (scale.n(), scale.r());
    Ok(ProblemConfig::psd(
        n,
        r,
        0.3,
        measurements(5.0, n, r)?,
        seed,
    ))
}

pub fn gen(cfg: &ProblemConfig, dir: impl AsRef<Path>) -> Result<ProblemInstance> {
    let inst = generate_problem(cfg)?;
    save_instance(dir, &inst)?;
    Ok(inst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitSpec {
    Random {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        seed: u64,
    },
    Spectral,
    TruncatedSpectral {
        #[serde(default)]
        beta: Option<f64>,
    },
    /// Factors read from matrix files; `v0` is required for general
    /// instances.
    File {
        u0: PathBuf,
        #[serde(default)]
        v0: Option<PathBuf>,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Random {
            scale: 1.0,
            seed: 0,
        }
    }
}

pub fn init(spec: &InitSpec, inst: &ProblemInstance) -> Result<InitOutput> {
    let kind = match spec {
        InitSpec::Random { scale, seed } => InitKind::Random {
            scale: *scale,
            seed: *seed,
        },
        InitSpec::Spectral => InitKind::Spectral,
        InitSpec::TruncatedSpectral { beta } => InitKind::TruncatedSpectral { beta: *beta },
        InitSpec::File { u0, v0 } => {
            let u0 = load_matrix(u0)?;
            let v0 = match v0 {
                Some(path) => load_matrix(path)?,
                None if inst.is_psd() => u0.clone(),
                None => return Err(ExpError::config("general instances need a v0 file")),
            };
            return Ok(InitOutput {
                u0,
                v0,
                status: InitStatus::Ok,
                kept: 0,
            });
        }
    };
    Ok(initialize(&InitConfig { kind, r: inst.r }, inst)?)
}

pub fn write_init(dir: impl AsRef<Path>, out: &InitOutput) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    save_matrix(dir.join("u0.mat"), &out.u0)?;
    save_matrix(dir.join("v0.mat"), &out.v0)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveConfig {
    pub schedule: StepSchedule,
    pub max_iters: usize,
    pub init: InitSpec,
    pub stride: usize,
    /// Balancing weight for general instances; defaults to the smallest
    /// value that saturates sharpness at `delta = 0`.
    pub lambda: Option<f64>,
    pub threshold: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            schedule: StepSchedule::Geometric {
                mu0: 1.0,
                rho: 0.96,
            },
            max_iters: 1000,
            init: InitSpec::default(),
            stride: 1,
            lambda: None,
            threshold: DEFAULT_SUCCESS_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: Status,
    pub iterations: usize,
    pub final_f: f64,
    pub backtracking_capped: usize,
    pub lambda: Option<f64>,
    #[serde(flatten)]
    pub recovery: RecoveryReport,
}

#[derive(Debug, Clone, Serialize)]
struct TraceRow {
    k: usize,
    f: f64,
    step: f64,
    gnorm: f64,
    dist: Option<f64>,
}

pub struct SolveOutcome {
    pub trace: SolverTrace,
    pub report: SolveReport,
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

pub fn solve(cfg: &SolveConfig, inst: &ProblemInstance) -> Result<SolveOutcome> {
    let start = init(&cfg.init, inst)?;
    let schedule = cfg
        .schedule
        .clone()
        .with_default_f_star(inst.optimal_l1_value());
    if inst.is_psd() {
        let ustar = &inst.ustar;
        let opts = SolveOptions::new(cfg.max_iters)
            .stride(cfg.stride)
            .distance(move |u| dist_to_orbit(u, ustar).unwrap_or(f64::NAN));
        let objective = L1Psd::from_instance(inst)?;
        let trace = subgm(&objective, &start.u0, &schedule, &opts)?;
        let u = trace.x.clone();
        finish(cfg, inst, trace, u.clone(), u, None)
    } else {
        let lambda = cfg
            .lambda
            .unwrap_or_else(|| lambda_recommended(inst.p, 0.0));
        let wstar = inst.wstar();
        let opts = SolveOptions::new(cfg.max_iters)
            .stride(cfg.stride)
            .distance(|w| dist_to_orbit_stacked(w, &wstar).unwrap_or(f64::NAN));
        let objective = L1General::from_instance(inst, lambda)?;
        let w0 = vstack(&start.u0, &start.v0);
        objective.check(&w0, "initial factors")?;
        let trace = subgm(&objective, &w0, &schedule, &opts)?;
        let n1 = inst.operator.n1();
        let u = trace.x.rows(0, n1).into_owned();
        let v = trace.x.rows(n1, inst.operator.n2()).into_owned();
        finish(cfg, inst, trace, u, v, Some(lambda))
    }
}

fn finish(
    cfg: &SolveConfig,
    inst: &ProblemInstance,
    trace: SolverTrace,
    u: DMatrix<f64>,
    v: DMatrix<f64>,
    lambda: Option<f64>,
) -> Result<SolveOutcome> {
    let x = &u * v.transpose();
    let mut recovery = recovery_report(&x, &inst.xstar, cfg.threshold)?;
    if let Some(d) = trace.final_dist() {
        recovery = recovery.with_dist(d);
    }
    let report = SolveReport {
        status: trace.status,
        iterations: trace.iterations,
        final_f: trace.last().f,
        backtracking_capped: trace.backtracking_capped,
        lambda,
        recovery,
    };
    Ok(SolveOutcome {
        trace,
        report,
        u,
        v,
    })
}

/// `trace.csv`, `report.json`, `u.mat` and (general instances) `v.mat`.
pub fn write_solve(
    dir: impl AsRef<Path>,
    inst: &ProblemInstance,
    out: &SolveOutcome,
) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let rows: Vec<TraceRow> = out
        .trace
        .records
        .iter()
        .map(|r| TraceRow {
            k: r.k,
            f: r.f,
            step: r.step,
            gnorm: r.gnorm,
            dist: r.dist,
        })
        .collect();
    write_records(dir.join("trace.csv"), &rows)?;
    std::fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(&out.report)?,
    )?;
    save_matrix(dir.join("u.mat"), &out.u)?;
    if !inst.is_psd() {
        save_matrix(dir.join("v.mat"), &out.v)?;
    }
    Ok(())
}

pub fn load(dir: impl AsRef<Path>) -> Result<ProblemInstance> {
    Ok(load_instance(dir)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_psd_polyak_reaches_exact_recovery() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ProblemConfig::psd(8, 1, 0.0, 64, 2);
        gen(&cfg, dir.path()).unwrap();
        let inst = load(dir.path()).unwrap();
        let solve_cfg = SolveConfig {
            schedule: StepSchedule::Polyak { f_star: Some(0.0) },
            max_iters: 500,
            ..SolveConfig::default()
        };
        let out = solve(&solve_cfg, &inst).unwrap();
        assert!(out.report.recovery.dist_orbit.unwrap() <= 1e-8);
        write_solve(dir.path(), &inst, &out).unwrap();
        assert!(dir.path().join("trace.csv").exists());
    }

    #[test]
    fn general_instance_solves() {
        let inst = generate_problem(&ProblemConfig::general(6, 5, 1, 0.1, 120, 4)).unwrap();
        let cfg = SolveConfig {
            init: InitSpec::TruncatedSpectral { beta: None },
            max_iters: 800,
            schedule: StepSchedule::Geometric {
                mu0: 0.5,
                rho: 0.98,
            },
            ..SolveConfig::default()
        };
        let out = solve(&cfg, &inst).unwrap();
        assert!(out.report.lambda.unwrap() > 0.0);
        assert!(out.report.recovery.rel_error < 1e-4, "{:?}", out.report);
    }

    #[test]
    fn init_spec_json() {
        let s: InitSpec = serde_json::from_str(r#"{"kind":"truncated_spectral"}"#).unwrap();
        assert_eq!(s, InitSpec::TruncatedSpectral { beta: None });
        let f: InitSpec = serde_json::from_str(r#"{"kind":"file","u0":"a.mat"}"#).unwrap();
        assert!(matches!(f, InitSpec::File { v0: None, .. }));
    }
}
