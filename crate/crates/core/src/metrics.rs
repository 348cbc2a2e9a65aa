//! Orbit distances, reconstruction error and the success rule.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sigma_r, thin_svd};

pub const DEFAULT_SUCCESS_THRESHOLD: f64 = 1e-6;

fn check_pair(u: &DMatrix<f64>, ustar: &DMatrix<f64>, context: &'static str) -> Result<()> {
    if u.shape() != ustar.shape() {
        return Err(Error::dims(
            context,
            format!("{}x{}", ustar.nrows(), ustar.ncols()),
            format!("{}x{}", u.nrows(), u.ncols()),
        ));
    }
    Ok(())
}

/// Orthogonal `R` minimizing `||U - U* R||_F`: the polar factor of `U*^T U`.
pub fn procrustes_align(u: &DMatrix<f64>, ustar: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_pair(u, ustar, "procrustes_align")?;
    let svd = thin_svd(&(ustar.transpose() * u));
    Ok(svd.left * svd.right.transpose())
}

/// Distance from `U` to the orbit `{U* R : R orthogonal}`.
pub fn dist_to_orbit(u: &DMatrix<f64>, ustar: &DMatrix<f64>) -> Result<f64> {
    let r = procrustes_align(u, ustar)?;
    Ok((u - ustar * r).norm())
}

/// Orbit distance for stacked iterates `W = (U; V)`.
pub fn dist_to_orbit_stacked(w: &DMatrix<f64>, wstar: &DMatrix<f64>) -> Result<f64> {
    dist_to_orbit(w, wstar)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub dist_orbit: Option<f64>,
    pub rel_error: f64,
    pub success: bool,
    pub threshold: f64,
}

impl RecoveryReport {
    pub fn with_dist(mut self, dist: f64) -> Self {
        self.dist_orbit = Some(dist);
        self
    }
}

/// `||X_hat - X*||_F / ||X*||_F` against `threshold`.
pub fn recovery_report(
    x_hat: &DMatrix<f64>,
    x_star: &DMatrix<f64>,
    threshold: f64,
) -> Result<RecoveryReport> {
    check_pair(x_hat, x_star, "recovery_report")?;
    let denom = x_star.norm();
    if denom == 0.0 {
        return Err(Error::config("relative error undefined for X* = 0"));
    }
    let rel_error = (x_hat - x_star).norm() / denom;
    Ok(RecoveryReport {
        dist_orbit: None,
        rel_error,
        success: rel_error <= threshold,
        threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcrustesBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares `2(sqrt2 - 1) sigma_r(X*) dist(U)^2` with `||U U^T - X*||_F^2`.
///
/// `sigma_r(X*) = sigma_r(U*)^2` enters to the first power; squaring it
/// breaks the inequality near the orbit once `sigma_r(X*)` exceeds about 4.8
/// (take `r = 1`, `U = (1 + e) U*`).
pub fn check_lemma31(u: &DMatrix<f64>, ustar: &DMatrix<f64>) -> Result<ProcrustesBound> {
    let xstar = ustar * ustar.transpose();
    let s = sigma_r(&xstar, ustar.ncols());
    let d = dist_to_orbit(u, ustar)?;
    let lhs = 2.0 * (2f64.sqrt() - 1.0) * s * d * d;
    let rhs = (u * u.transpose() - &xstar).norm_squared();
    // Absolute slack for the alignment round-off on the orbit itself.
    let slack = 1e-20 * xstar.norm_squared();
    Ok(ProcrustesBound {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-10) + slack,
    })
}
