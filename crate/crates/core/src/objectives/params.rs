use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::mean_abs_gaussian;

/// Which power of `sigma_r` enters the general-case sharpness constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharpnessMode {
    /// `sigma_r^{1/2}`, the power the sharpness argument actually delivers.
    #[default]
    Proof,
    /// `sigma_r^1`, as the result is usually quoted.
    AsStated,
}

impl SharpnessMode {
    fn exponent(self) -> f64 {
        match self {
            SharpnessMode::Proof => 0.5,
            SharpnessMode::AsStated => 1.0,
        }
    }
}

/// Largest outlier fraction for which the l1 loss stays sharp.
pub fn max_outlier_ratio(delta: f64) -> f64 {
    let c = mean_abs_gaussian();
    0.5 - delta / (c - delta)
}

/// `zeta = 2(1-p)(c - delta) - (c + delta)`, the common sharpness factor.
fn zeta(p: f64, delta: f64) -> f64 {
    let c = mean_abs_gaussian();
    2.0 * (1.0 - p) * (c - delta) - (c + delta)
}

fn check_common(p: f64, delta: f64, sigma_r: f64) -> Result<()> {
    let c = mean_abs_gaussian();
    if !(delta >= 0.0 && delta < c / 3.0) {
        return Err(Error::config(format!(
            "RIP constant delta = {delta} outside [0, sqrt(2/pi)/3)"
        )));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::config(format!(
            "outlier ratio p = {p} outside [0, 1)"
        )));
    }
    let bound = max_outlier_ratio(delta);
    if p >= bound {
        return Err(Error::config(format!(
            "outlier ratio p = {p} violates p < 1/2 - delta/(sqrt(2/pi) - delta) = {bound}"
        )));
    }
    if !(sigma_r > 0.0 && sigma_r.is_finite()) {
        return Err(Error::config(format!(
            "sigma_r = {sigma_r} must be positive"
        )));
    }
    Ok(())
}

/// Sharpness constant of the PSD objective.
pub fn sharpness_psd(p: f64, delta: f64, sigma_r: f64) -> Result<f64> {
    check_common(p, delta, sigma_r)?;
    let pre = (2.0 * (2f64.sqrt() - 1.0)).sqrt();
    Ok(pre * zeta(p, delta) * sigma_r)
}

/// Weak-convexity constant of the PSD objective.
pub fn weakconvexity_psd(delta: f64) -> f64 {
    2.0 * (mean_abs_gaussian() + delta)
}

fn check_ball(alpha: f64, tau: f64, fro: f64) -> Result<()> {
    if !(tau > 0.0) {
        return Err(Error::config(format!("tau = {tau} must be positive")));
    }
    if !(alpha >= 0.0) || !(fro >= 0.0) {
        return Err(Error::config(
            "alpha and the ground-truth norm must be nonnegative",
        ));
    }
    Ok(())
}

/// Subgradient-norm bound of the PSD objective on the `2 alpha/tau` ball.
pub fn kappa_psd(delta: f64, ustar_fro: f64, alpha: f64, tau: f64) -> Result<f64> {
    check_ball(alpha, tau, ustar_fro)?;
    Ok(2.0 * (mean_abs_gaussian() + delta) * (ustar_fro + 2.0 * alpha / tau))
}

/// Sharpness constant of the regularized general objective; zero when
/// `lambda = 0`.
pub fn sharpness_general(
    p: f64,
    delta: f64,
    lambda: f64,
    sigma_r: f64,
    mode: SharpnessMode,
) -> Result<f64> {
    check_common(p, delta, sigma_r)?;
    if !(lambda >= 0.0) {
        return Err(Error::config(format!(
            "lambda = {lambda} must be nonnegative"
        )));
    }
    let pre = (2f64.sqrt() - 1.0).sqrt();
    Ok(pre * zeta(p, delta).min(2.0 * lambda) * sigma_r.powf(mode.exponent()))
}

pub fn weakconvexity_general(delta: f64, lambda: f64) -> f64 {
    mean_abs_gaussian() + delta + 2.0 * lambda
}

pub fn kappa_general(delta: f64, lambda: f64, wstar_fro: f64, alpha: f64, tau: f64) -> Result<f64> {
    check_ball(alpha, tau, wstar_fro)?;
    let pre = (mean_abs_gaussian() + delta).max(lambda);
    Ok(pre * (wstar_fro + 2.0 * alpha / tau))
}

/// Smallest `lambda` at which the general sharpness constant saturates.
pub fn lambda_recommended(p: f64, delta: f64) -> f64 {
    zeta(p, delta) / 2.0
}

/// The regularity constants of one problem, as emitted in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityParams {
    pub alpha: f64,
    pub tau: f64,
    pub kappa: f64,
    pub lambda: Option<f64>,
    pub delta: f64,
    pub p: f64,
    pub sigma_r: f64,
    pub mode: Option<SharpnessMode>,
}

impl RegularityParams {
    pub fn psd(p: f64, delta: f64, sigma_r: f64, ustar_fro: f64) -> Result<Self> {
        let alpha = sharpness_psd(p, delta, sigma_r)?;
        let tau = weakconvexity_psd(delta);
        let kappa = kappa_psd(delta, ustar_fro, alpha, tau)?;
        Ok(Self {
            alpha,
            tau,
            kappa,
            lambda: None,
            delta,
            p,
            sigma_r,
            mode: None,
        })
    }

    pub fn general(
        p: f64,
        delta: f64,
        lambda: f64,
        sigma_r: f64,
        wstar_fro: f64,
        mode: SharpnessMode,
    ) -> Result<Self> {
        let alpha = sharpness_general(p, delta, lambda, sigma_r, mode)?;
        let tau = weakconvexity_general(delta, lambda);
        let kappa = kappa_general(delta, lambda, wstar_fro, alpha, tau)?;
        Ok(Self {
            alpha,
            tau,
            kappa,
            lambda: Some(lambda),
            delta,
            p,
            sigma_r,
            mode: Some(mode),
        })
    }

    /// Radius `2 alpha / tau` of the basin in which the linear-rate
    /// guarantee applies.
    pub fn basin_radius(&self) -> f64 {
        2.0 * self.alpha / self.tau
    }
}
