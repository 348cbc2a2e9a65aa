use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of step reductions in one backtracking search.
pub const BACKTRACKING_CAP: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    /// `mu_k = mu0 rho^k`.
    Geometric { mu0: f64, rho: f64 },
    /// `mu_k = (f(x_k) - f_star) / ||d_k||^2`.
    Polyak {
        #[serde(default)]
        f_star: Option<f64>,
    },
    /// `mu_k = mu_top factor^floor(k / period)`.
    PiecewiseGeometric {
        mu_top: f64,
        factor: f64,
        period: usize,
    },
    /// Starts from the previous step and shrinks it by `rho` until the
    /// sufficient-decrease test holds.
    Backtracking {
        eta: f64,
        rho: f64,
        mu0: f64,
        /// Stop at the first step that fails to decrease instead.
        #[serde(default)]
        literal: bool,
    },
}

fn unit_open(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} = {v} must lie in (0, 1)")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("{name} = {v} must be positive")))
    }
}

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StepSchedule::Geometric { mu0, rho } => {
                positive("mu0", mu0)?;
                unit_open("rho", rho)
            }
            StepSchedule::Polyak { f_star } => match f_star {
                Some(v) if !v.is_finite() => Err(Error::config("f_star must be finite")),
                _ => Ok(()),
            },
            StepSchedule::PiecewiseGeometric {
                mu_top,
                factor,
                period,
            } => {
                positive("mu_top", mu_top)?;
                unit_open("factor", factor)?;
                if period == 0 {
                    return Err(Error::config("period must be at least 1"));
                }
                Ok(())
            }
            StepSchedule::Backtracking { eta, rho, mu0, .. } => {
                positive("eta", eta)?;
                unit_open("rho", rho)?;
                positive("mu0", mu0)
            }
        }
    }

    /// Fills a missing Polyak optimal value.
    pub fn with_default_f_star(self, f_star: f64) -> Self {
        match self {
            StepSchedule::Polyak { f_star: None } => StepSchedule::Polyak {
                f_star: Some(f_star),
            },
            other => other,
        }
    }
}

pub fn step_geometric(k: usize, mu0: f64, rho: f64) -> f64 {
    mu0 * rho.powi(k as i32)
}

pub fn step_polyak(f_k: f64, f_star: f64, gnorm: f64) -> f64 {
    (f_k - f_star) / (gnorm * gnorm)
}

pub fn step_piecewise(k: usize, mu_top: f64, factor: f64, period: usize) -> f64 {
    mu_top * factor.powi((k / period) as i32)
}

/// Outcome of one backtracking search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backtrack {
    pub mu: f64,
    pub reductions: usize,
    /// The cap was reached before the test held.
    pub capped: bool,
}

/// Shrinks `mu_prev` by `rho` until `f(x - mu d) <= f(x) - eta mu ||d||`.
/// In `literal` mode the loop instead stops at the first `mu` with
/// `f(x - mu d) > f(x) - eta mu ||d||`.
#[allow(clippy::too_many_arguments)]
pub fn step_backtracking(
    value: impl Fn(&DMatrix<f64>) -> Result<f64>,
    x: &DMatrix<f64>,
    d: &DMatrix<f64>,
    f_x: f64,
    mu_prev: f64,
    eta: f64,
    rho: f64,
    literal: bool,
) -> Result<Backtrack> {
    let dnorm = d.norm();
    if dnorm == 0.0 {
        return Err(Error::config("backtracking needs a nonzero direction"));
    }
    let mut mu = mu_prev;
    for reductions in 0..=BACKTRACKING_CAP {
        let trial = value(&(x - d * mu))?;
        let decrease = trial <= f_x - eta * mu * dnorm;
        if decrease != literal {
            return Ok(Backtrack {
                mu,
                reductions,
                capped: false,
            });
        }
        if reductions < BACKTRACKING_CAP {
            mu *= rho;
        }
    }
    Ok(Backtrack {
        mu,
        reductions: BACKTRACKING_CAP,
        capped: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_value(x: &DMatrix<f64>) -> Result<f64> {
        Ok(x[(0, 0)].abs())
    }

    #[test]
    fn closed_forms() {
        assert_eq!(step_geometric(0, 3.0, 0.5), 3.0);
        assert_eq!(step_polyak(0.5, 0.0, 2.0), 0.125);
        assert_eq!(step_polyak(1.0, 1.0, 2.0), 0.0);
        assert_eq!(step_piecewise(120, 1.0, 0.5, 50), 0.25);
        assert_eq!(step_piecewise(0, 2.0, 0.5, 50), 2.0);
    }

    #[test]
    fn backtracking_keeps_acceptable_step() {
        let x = DMatrix::from_element(1, 1, 1.0);
        let d = DMatrix::from_element(1, 1, 1.0);
        let bt = step_backtracking(abs_value, &x, &d, 1.0, 0.5, 1e-3, 0.85, false).unwrap();
        assert_eq!(bt.mu, 0.5);
        assert_eq!(bt.reductions, 0);
    }

    #[test]
    fn backtracking_flags_cap() {
        // An ascent direction never passes the test.
        let x = DMatrix::from_element(1, 1, 1.0);
        let d = DMatrix::from_element(1, 1, -1.0);
        let bt = step_backtracking(abs_value, &x, &d, 1.0, 1.0, 1e-3, 0.9, false).unwrap();
        assert!(bt.capped);
        assert_eq!(bt.reductions, BACKTRACKING_CAP);
        assert!((bt.mu / 0.9f64.powi(60) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn literal_reading_stops_at_non_decrease() {
        let x = DMatrix::from_element(1, 1, 1.0);
        let d = DMatrix::from_element(1, 1, 1.0);
        let bt = step_backtracking(abs_value, &x, &d, 1.0, 10.0, 1e-3, 0.85, true).unwrap();
        assert_eq!(bt.mu, 10.0);
    }

    #[test]
    fn schedule_json_tags() {
        let s: StepSchedule =
            serde_json::from_str(r#"{"kind":"geometric","mu0":1.0,"rho":0.96}"#).unwrap();
        assert_eq!(
            s,
            StepSchedule::Geometric {
                mu0: 1.0,
                rho: 0.96
            }
        );
        let p: StepSchedule = serde_json::from_str(r#"{"kind":"polyak"}"#).unwrap();
        assert_eq!(
            p.with_default_f_star(2.0),
            StepSchedule::Polyak { f_star: Some(2.0) }
        );
        let b: StepSchedule =
            serde_json::from_str(r#"{"kind":"backtracking","eta":0.001,"rho":0.85,"mu0":1}"#)
                .unwrap();
        assert!(b.validate().is_ok());
        assert!(StepSchedule::PiecewiseGeometric {
            mu_top: 1.0,
            factor: 0.5,
            period: 0
        }
        .validate()
        .is_err());
    }
}
