//! Closed-form admissible step-size parameters for geometrically
//! diminishing steps on sharp, weakly convex problems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `dist0 <= alpha / tau`: any small enough `mu0` works.
    CaseI,
    /// `alpha / tau < dist0 < 2 alpha / tau`: the admissible `mu0` shrinks
    /// to zero at the edge of the basin.
    CaseII,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleBounds {
    pub mu0_max: f64,
    pub rho_lower: f64,
    pub dist0_bar: f64,
    pub regime: Regime,
}

fn check_constants(alpha: f64, tau: f64, kappa: f64) -> Result<()> {
    if !(alpha > 0.0) || !(kappa > 0.0) || !(tau >= 0.0) {
        return Err(Error::config(format!(
            "need alpha > 0, kappa > 0, tau >= 0 (got {alpha}, {kappa}, {tau})"
        )));
    }
    Ok(())
}

/// Largest admissible initial step. Infinite for convex problems (`tau = 0`).
pub fn mu0_max(alpha: f64, tau: f64, kappa: f64, dist0: f64) -> f64 {
    if tau == 0.0 {
        return f64::INFINITY;
    }
    let excess = ((tau / alpha) * dist0 - 1.0).max(0.0);
    alpha * alpha / (2.0 * tau * kappa * kappa) * (1.0 - excess * excess)
}

/// Effective initial distance `max{dist0, mu0 max{kappa^2, 2 alpha^2} / alpha}`.
pub fn dist0_bar(alpha: f64, kappa: f64, mu0: f64, dist0: f64) -> f64 {
    dist0.max(mu0 * (kappa * kappa).max(2.0 * alpha * alpha) / alpha)
}

pub fn regime(alpha: f64, tau: f64, dist0: f64) -> Regime {
    if tau == 0.0 || dist0 <= alpha / tau {
        Regime::CaseI
    } else {
        Regime::CaseII
    }
}

/// The rate expression `sqrt(1 - (2 alpha/d - tau) mu0 + kappa^2 mu0^2 / d^2)`
/// evaluated at an arbitrary distance `d`.
pub fn rho_at_distance(alpha: f64, tau: f64, kappa: f64, mu0: f64, d: f64) -> f64 {
    let s = 1.0 - (2.0 * alpha / d - tau) * mu0 + kappa * kappa * mu0 * mu0 / (d * d);
    s.max(0.0).sqrt()
}

/// Smallest decay rate admissible with initial step `mu0`.
pub fn rho_lower(alpha: f64, tau: f64, kappa: f64, mu0: f64, dist0: f64) -> Result<f64> {
    check_constants(alpha, tau, kappa)?;
    if !(mu0 >= 0.0) || !(dist0 >= 0.0) {
        return Err(Error::config("mu0 and dist0 must be nonnegative"));
    }
    if tau > 0.0 && dist0 >= 2.0 * alpha / tau {
        return Err(Error::config(format!(
            "dist0 = {dist0} lies outside the basin radius 2 alpha / tau = {}",
            2.0 * alpha / tau
        )));
    }
    let cap = mu0_max(alpha, tau, kappa, dist0);
    if mu0 > cap {
        return Err(Error::config(format!(
            "mu0 = {mu0} exceeds mu0_max = {cap}"
        )));
    }
    let d = dist0_bar(alpha, kappa, mu0, dist0);
    if d == 0.0 {
        return Err(Error::config("dist0 and mu0 are both zero"));
    }
    Ok(rho_at_distance(alpha, tau, kappa, mu0, d))
}

pub fn schedule_bounds(
    alpha: f64,
    tau: f64,
    kappa: f64,
    mu0: f64,
    dist0: f64,
) -> Result<ScheduleBounds> {
    Ok(ScheduleBounds {
        rho_lower: rho_lower(alpha, tau, kappa, mu0, dist0)?,
        mu0_max: mu0_max(alpha, tau, kappa, dist0),
        dist0_bar: dist0_bar(alpha, kappa, mu0, dist0),
        regime: regime(alpha, tau, dist0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoPoint {
    pub mu0: f64,
    /// Absent where `mu0` is inadmissible.
    pub rho_lower: Option<f64>,
    pub dist0_bar: f64,
}

/// Tabulates the admissible rate against the initial step.
pub fn rho_curve(alpha: f64, tau: f64, kappa: f64, dist0: f64, mu0_grid: &[f64]) -> Vec<RhoPoint> {
    mu0_grid
        .iter()
        .map(|&mu0| RhoPoint {
            mu0,
            rho_lower: rho_lower(alpha, tau, kappa, mu0, dist0).ok(),
            dist0_bar: dist0_bar(alpha, kappa, mu0, dist0),
        })
        .collect()
}
