pub mod converge;
pub mod instance;
pub mod landscape;
pub mod phase;
pub mod ratecurve;
pub mod riprobe;
pub mod stepgrid;

use robust_lowrank::init::random_init;
use robust_lowrank::metrics::dist_to_orbit;
use robust_lowrank::objectives::L1Psd;
use robust_lowrank::operators::{generate_problem, ProblemConfig, ProblemInstance};
use robust_lowrank::solver::{subgm, SolveOptions, SolverTrace, StepSchedule};

use crate::config::measurements;
use crate::error::Result;

/// PSD instance with a Gaussian operator and `round(ratio n r)` measurements.
pub fn psd_instance(n: usize, r: usize, ratio: f64, p: f64, seed: u64) -> Result<ProblemInstance> {
    let m = measurements(ratio, n, r)?;
    Ok(generate_problem(&ProblemConfig::psd(n, r, p, m, seed))?)
}

/// SubGM from a standard Gaussian start scaled by `init_scale`, recording
/// the orbit distance every `stride` iterations.
pub fn solve_from_random(
    inst: &ProblemInstance,
    objective: &L1Psd,
    schedule: &StepSchedule,
    iters: usize,
    stride: usize,
    init_scale: f64,
    init_seed: u64,
) -> Result<SolverTrace> {
    let u0 = random_init(inst.operator.n1(), inst.r, init_scale, init_seed);
    let ustar = &inst.ustar;
    let opts = SolveOptions::new(iters)
        .stride(stride)
        .distance(move |u| dist_to_orbit(u, ustar).unwrap_or(f64::NAN));
    Ok(subgm(objective, &u0, schedule, &opts)?)
}
