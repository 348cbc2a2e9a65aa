//! The subgradient method with its step-size schedules, plus a fixed-step
//! gradient-descent baseline sharing the same trace format.

mod bounds;
mod schedule;

pub use bounds::{
    dist0_bar, mu0_max, regime, rho_at_distance, rho_curve, rho_lower, schedule_bounds, Regime,
    RhoPoint, ScheduleBounds,
};
pub use schedule::{
    step_backtracking, step_geometric, step_piecewise, step_polyak, Backtrack, StepSchedule,
    BACKTRACKING_CAP,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::Objective;

/// Objective values beyond this are treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    MaxIters,
    ZeroSubgradient,
    Diverged,
}

/// One iteration: value, step and subgradient norm at `x_k`, and the
/// distance of `x_k` to the solution set when a reference is attached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub f: f64,
    pub step: f64,
    pub gnorm: f64,
    pub dist: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
    pub status: Status,
    /// Last iterate reached (the diverging one on divergence).
    pub x: DMatrix<f64>,
    /// Number of updates performed.
    pub iterations: usize,
    /// Backtracking searches that hit the reduction cap.
    pub backtracking_capped: usize,
}

impl SolverTrace {
    pub fn last(&self) -> &TraceRecord {
        self.records
            .last()
            .expect("traces hold at least one record")
    }

    pub fn final_dist(&self) -> Option<f64> {
        self.last().dist
    }
}

/// Per-run options shared by both solvers.
pub struct SolveOptions<'a> {
    pub max_iters: usize,
    /// Record every `stride`-th iteration (the terminal one always).
    pub stride: usize,
    /// Distance of an iterate to the solution set.
    pub distance: Option<Box<dyn Fn(&DMatrix<f64>) -> f64 + 'a>>,
}

impl<'a> SolveOptions<'a> {
    pub fn new(max_iters: usize) -> Self {
        Self {
            max_iters,
            stride: 1,
            distance: None,
        }
    }

    pub fn stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn distance(mut self, f: impl Fn(&DMatrix<f64>) -> f64 + 'a) -> Self {
        self.distance = Some(Box::new(f));
        self
    }
}

enum Rule<'s> {
    Schedule(&'s StepSchedule),
    Fixed(f64),
}

/// Runs `x_{k+1} = x_k - mu_k d_k` for `max_iters` updates.
///
/// The trace holds one record per visited iterate `x_0, ..., x_K` (subject
/// to the stride); the terminal record carries step 0.
pub fn subgm<O: Objective + ?Sized>(
    objective: &O,
    x0: &DMatrix<f64>,
    schedule: &StepSchedule,
    opts: &SolveOptions<'_>,
) -> Result<SolverTrace> {
    schedule.validate()?;
    run(objective, x0, Rule::Schedule(schedule), opts)
}

/// Fixed-step gradient descent for smooth baselines.
pub fn gradient_descent<O: Objective + ?Sized>(
    objective: &O,
    x0: &DMatrix<f64>,
    step: f64,
    opts: &SolveOptions<'_>,
) -> Result<SolverTrace> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::config(format!("step = {step} must be positive")));
    }
    run(objective, x0, Rule::Fixed(step), opts)
}

fn run<O: Objective + ?Sized>(
    objective: &O,
    x0: &DMatrix<f64>,
    rule: Rule<'_>,
    opts: &SolveOptions<'_>,
) -> Result<SolverTrace> {
    if opts.max_iters == 0 {
        return Err(Error::config("max_iters must be at least 1"));
    }
    if opts.stride == 0 {
        return Err(Error::config("trace stride must be at least 1"));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("initial iterate has non-finite entries"));
    }
    objective.check(x0, "solver initial iterate")?;

    let mut x = x0.clone();
    let mut records = Vec::with_capacity(opts.max_iters / opts.stride + 2);
    let mut backtracking_mu = match rule {
        Rule::Schedule(StepSchedule::Backtracking { mu0, .. }) => *mu0,
        _ => 0.0,
    };
    let mut capped = 0;
    let mut status = Status::MaxIters;
    let mut k = 0;

    loop {
        let (f, d) = objective.value_and_subgradient(&x)?;
        let gnorm = d.norm();
        let record = |step: f64| TraceRecord {
            k,
            f,
            step,
            gnorm,
            dist: opts.distance.as_ref().map(|dist| dist(&x)),
        };

        if !f.is_finite() || f > DIVERGENCE_LIMIT || !gnorm.is_finite() {
            status = Status::Diverged;
            records.push(record(0.0));
            break;
        }
        if k == opts.max_iters {
            records.push(record(0.0));
            break;
        }

        let step = match rule {
            Rule::Fixed(mu) => mu,
            Rule::Schedule(s) => match *s {
                StepSchedule::Geometric { mu0, rho } => step_geometric(k, mu0, rho),
                StepSchedule::PiecewiseGeometric {
                    mu_top,
                    factor,
                    period,
                } => step_piecewise(k, mu_top, factor, period),
                StepSchedule::Polyak { f_star } => {
                    if gnorm == 0.0 {
                        status = Status::ZeroSubgradient;
                        records.push(record(0.0));
                        break;
                    }
                    let f_star = f_star.ok_or_else(|| {
                        Error::config("Polyak steps need an optimal value f_star")
                    })?;
                    // Round-off can push f below f_star; never step uphill.
                    step_polyak(f, f_star, gnorm).max(0.0)
                }
                StepSchedule::Backtracking {
                    eta, rho, literal, ..
                } => {
                    if gnorm > 0.0 {
                        let bt = step_backtracking(
                            |z| objective.value(z),
                            &x,
                            &d,
                            f,
                            backtracking_mu,
                            eta,
                            rho,
                            literal,
                        )?;
                        if bt.capped {
                            capped += 1;
                        }
                        backtracking_mu = bt.mu;
                    }
                    backtracking_mu
                }
            },
        };

        if k % opts.stride == 0 {
            records.push(record(step));
        }
        if gnorm > 0.0 {
            crate::linalg::axpy(-step, d.as_slice(), x.as_mut_slice());
        }
        k += 1;
    }

    Ok(SolverTrace {
        records,
        status,
        x,
        iterations: k,
        backtracking_capped: capped,
    })
}
