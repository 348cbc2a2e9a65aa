//! Starting points: truncated spectral, plain spectral and scaled random.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gaussian_matrix, median, sigma_r, truncated_svd, truncated_symmetric};
use crate::operators::{ProblemInstance, SensingOperator};
use crate::rng::{tag, Stream};

/// How the rank-`r` factorization of the spectral estimate is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMode {
    /// SVD of the estimate: `U0 = P Pi^{1/2}`, `V0 = Q Pi^{1/2}`.
    General,
    /// Eigendecomposition of the symmetrized estimate with `|eigenvalue|`
    /// weights; `U0 = V0`.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStatus {
    Ok,
    /// The spectral estimate vanished (every measurement truncated, or
    /// `y = 0`); the factors are zero.
    ZeroEstimate,
}

#[derive(Debug, Clone)]
pub struct InitOutput {
    pub u0: DMatrix<f64>,
    pub v0: DMatrix<f64>,
    pub status: InitStatus,
    /// Measurements that entered the estimate.
    pub kept: usize,
}

fn factor(e: &DMatrix<f64>, r: usize, mode: SpectralMode, kept: usize) -> Result<InitOutput> {
    if r == 0 || r > e.nrows().min(e.ncols()) {
        return Err(Error::config(format!(
            "rank r = {r} invalid for a {}x{} estimate",
            e.nrows(),
            e.ncols()
        )));
    }
    if e.iter().all(|&v| v == 0.0) {
        return Ok(InitOutput {
            u0: DMatrix::zeros(e.nrows(), r),
            v0: DMatrix::zeros(e.ncols(), r),
            status: InitStatus::ZeroEstimate,
            kept,
        });
    }
    let svd = match mode {
        SpectralMode::General => truncated_svd(e, r),
        SpectralMode::Symmetric => {
            if e.nrows() != e.ncols() {
                return Err(Error::config("symmetric mode needs a square estimate"));
            }
            truncated_symmetric(e, r)
        }
    };
    let (u0, v0) = svd.balanced_factors();
    Ok(InitOutput {
        u0,
        v0,
        status: InitStatus::Ok,
        kept,
    })
}

/// Median-truncated spectral estimate from the first half of the
/// measurements, thresholded by `beta` times the median magnitude of the
/// second half. `beta = inf` disables truncation.
pub fn truncated_spectral_init(
    op: &SensingOperator,
    y: &DVector<f64>,
    r: usize,
    beta: f64,
    mode: SpectralMode,
) -> Result<InitOutput> {
    let m = op.m();
    if y.len() != m {
        return Err(Error::dims("truncated_spectral_init", m, y.len()));
    }
    if m < 2 {
        return Err(Error::config(
            "truncated spectral initialization needs m >= 2",
        ));
    }
    if !(beta > 0.0) {
        return Err(Error::config(format!("beta = {beta} must be positive")));
    }
    let half = m / 2;
    let threshold = if beta.is_infinite() {
        f64::INFINITY
    } else {
        let tail: Vec<f64> = y.iter().skip(half).map(|v| v.abs()).collect();
        beta * median(&tail).expect("second half is nonempty")
    };
    let mut e = DMatrix::zeros(op.n1(), op.n2());
    let es = e.as_mut_slice();
    let mut kept = 0;
    op.for_each_block(|i, a| {
        if i < half && y[i].abs() <= threshold {
            kept += 1;
            crate::linalg::axpy(y[i], a, es);
        }
    });
    e /= half as f64;
    factor(&e, r, mode, kept)
}

/// Rank-`r` factorization of `(1/m) A^*(y)`.
pub fn spectral_init(
    op: &SensingOperator,
    y: &DVector<f64>,
    r: usize,
    mode: SpectralMode,
) -> Result<InitOutput> {
    let e = op.adjoint(y)? / op.m() as f64;
    factor(&e, r, mode, op.m())
}

/// `n x r` matrix of i.i.d. `N(0, scale^2)` entries.
pub fn random_init(n: usize, r: usize, scale: f64, seed: u64) -> DMatrix<f64> {
    gaussian_matrix(n, r, scale, &mut Stream::new(seed, tag::INIT, 0))
}

/// `||X*||_F / (sqrt(r) sigma_r(X*))`.
pub fn cbar(xstar: &DMatrix<f64>, r: usize) -> Result<f64> {
    if r == 0 {
        return Err(Error::config("rank must be positive"));
    }
    let s = sigma_r(xstar, r);
    if s == 0.0 {
        return Err(Error::config(format!("X* has rank below {r}")));
    }
    Ok(xstar.norm() / ((r as f64).sqrt() * s))
}

/// Default truncation level `2 ln(r^{1/4} cbar^{1/2} + 20)`.
pub fn beta_default(r: usize, cbar: f64) -> f64 {
    2.0 * ((r as f64).powf(0.25) * cbar.sqrt() + 20.0).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitKind {
    Random {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        seed: u64,
    },
    Spectral,
    TruncatedSpectral {
        /// Defaults to `beta_default(r, cbar(X*))`.
        #[serde(default)]
        beta: Option<f64>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitConfig {
    #[serde(flatten)]
    pub kind: InitKind,
    pub r: usize,
}

/// Initializes on an instance, factoring symmetrically for PSD instances.
pub fn initialize(cfg: &InitConfig, inst: &ProblemInstance) -> Result<InitOutput> {
    let mode = if inst.is_psd() {
        SpectralMode::Symmetric
    } else {
        SpectralMode::General
    };
    match cfg.kind {
        InitKind::Random { scale, seed } => {
            if !(scale >= 0.0) {
                return Err(Error::config("random init scale must be nonnegative"));
            }
            let u0 = random_init(inst.operator.n1(), cfg.r, scale, seed);
            let v0 = if inst.is_psd() {
                u0.clone()
            } else {
                gaussian_matrix(
                    inst.operator.n2(),
                    cfg.r,
                    scale,
                    &mut Stream::new(seed, tag::INIT, 1),
                )
            };
            Ok(InitOutput {
                u0,
                v0,
                status: InitStatus::Ok,
                kept: 0,
            })
        }
        InitKind::Spectral => spectral_init(&inst.operator, &inst.y, cfg.r, mode),
        InitKind::TruncatedSpectral { beta } => {
            let beta = match beta {
                Some(b) => b,
                None => beta_default(cfg.r, cbar(&inst.xstar, inst.r)?),
            };
            truncated_spectral_init(&inst.operator, &inst.y, cfg.r, beta, mode)
        }
    }
}
