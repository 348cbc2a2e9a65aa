//! Gaussian sensing operators, outlier-corrupted problem instances and the
//! Monte-Carlo probe of the l1/l2 restricted isometry constant.

use std::borrow::Cow;
use std::f64::consts::FRAC_2_PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, gaussian_matrix};
use crate::rng::{tag, Stream};

/// `sqrt(2/pi)`, the mean of `|N(0,1)|`.
pub fn mean_abs_gaussian() -> f64 {
    FRAC_2_PI.sqrt()
}

#[derive(Debug, Clone)]
enum Storage {
    /// `m` contiguous column-major blocks of `n1 * n2` entries.
    Dense(Vec<f64>),
    /// Matrices regenerated from the seed on every access; holds the
    /// original index of each kept matrix.
    OnTheFly(Vec<u64>),
}

/// The linear map `X -> (<A_1, X>, ..., <A_m, X>)`.
#[derive(Debug, Clone)]
pub struct SensingOperator {
    n1: usize,
    n2: usize,
    m: usize,
    symmetric: bool,
    seed: Option<u64>,
    storage: Storage,
}

fn fill_matrix(seed: u64, index: u64, n1: usize, n2: usize, symmetric: bool, out: &mut [f64]) {
    let mut stream = Stream::new(seed, tag::SENSING, index);
    if symmetric {
        // Upper triangle column by column, mirrored below the diagonal.
        for col in 0..n2 {
            for row in 0..=col {
                let z = stream.normal();
                out[col * n1 + row] = z;
                out[row * n1 + col] = z;
            }
        }
    } else {
        for v in out.iter_mut() {
            *v = stream.normal();
        }
    }
}

/// Operator with `m` matrices of i.i.d. `N(0, 1)` entries.
pub fn gaussian_operator(n1: usize, n2: usize, m: usize, seed: u64) -> Result<SensingOperator> {
    SensingOperator::generate(n1, n2, m, seed, false)
}

/// Operator with symmetric matrices whose entries on and above the diagonal
/// are i.i.d. `N(0, 1)`.
pub fn symmetric_gaussian_operator(n: usize, m: usize, seed: u64) -> Result<SensingOperator> {
    SensingOperator::generate(n, n, m, seed, true)
}

impl SensingOperator {
    fn generate(n1: usize, n2: usize, m: usize, seed: u64, symmetric: bool) -> Result<Self> {
        if n1 == 0 || n2 == 0 || m == 0 {
            return Err(Error::config("operator dimensions and m must be positive"));
        }
        if symmetric && n1 != n2 {
            return Err(Error::config("symmetric operators need square matrices"));
        }
        let block = n1 * n2;
        let mut data = vec![0.0; m * block];
        for (i, chunk) in data.chunks_exact_mut(block).enumerate() {
            fill_matrix(seed, i as u64, n1, n2, symmetric, chunk);
        }
        Ok(Self {
            n1,
            n2,
            m,
            symmetric,
            seed: Some(seed),
            storage: Storage::Dense(data),
        })
    }

    /// Builds an operator from explicit matrices. `symmetric` is checked.
    pub fn from_matrices(matrices: &[DMatrix<f64>], symmetric: bool) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::config("operator needs at least one matrix"))?;
        let (n1, n2) = first.shape();
        let mut data = Vec::with_capacity(matrices.len() * n1 * n2);
        for (i, a) in matrices.iter().enumerate() {
            if a.shape() != (n1, n2) {
                return Err(Error::dims(
                    "SensingOperator::from_matrices",
                    format!("{n1}x{n2}"),
                    format!("{}x{} at index {i}", a.nrows(), a.ncols()),
                ));
            }
            if symmetric && *a != a.transpose() {
                return Err(Error::config(format!("matrix {i} is not symmetric")));
            }
            data.extend_from_slice(a.as_slice());
        }
        Ok(Self {
            n1,
            n2,
            m: matrices.len(),
            symmetric,
            seed: None,
            storage: Storage::Dense(data),
        })
    }

    /// Drops the materialized matrices and regenerates them from the seed on
    /// demand. Trades time for memory at large `m`.
    pub fn into_on_the_fly(self) -> Result<Self> {
        if self.seed.is_none() {
            return Err(Error::config("only seeded operators can be regenerated"));
        }
        let storage = match self.storage {
            Storage::Dense(_) => Storage::OnTheFly((0..self.m as u64).collect()),
            s @ Storage::OnTheFly(_) => s,
        };
        Ok(Self { storage, ..self })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn is_materialized(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// Entries of `A_i` in column-major order.
    pub fn block(&self, i: usize) -> Cow<'_, [f64]> {
        let len = self.n1 * self.n2;
        match &self.storage {
            Storage::Dense(data) => Cow::Borrowed(&data[i * len..(i + 1) * len]),
            Storage::OnTheFly(indices) => {
                let mut buf = vec![0.0; len];
                let seed = self.seed.expect("on-the-fly operators are seeded");
                fill_matrix(seed, indices[i], self.n1, self.n2, self.symmetric, &mut buf);
                Cow::Owned(buf)
            }
        }
    }

    /// `A_i` as a matrix.
    pub fn matrix(&self, i: usize) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.n1, self.n2, &self.block(i))
    }

    /// Calls `f(i, A_i)` for every sensing matrix in order.
    pub fn for_each_block(&self, mut f: impl FnMut(usize, &[f64])) {
        let len = self.n1 * self.n2;
        match &self.storage {
            Storage::Dense(data) => {
                for (i, block) in data.chunks_exact(len).enumerate() {
                    f(i, block);
                }
            }
            Storage::OnTheFly(indices) => {
                let seed = self.seed.expect("on-the-fly operators are seeded");
                let mut buf = vec![0.0; len];
                for (i, &orig) in indices.iter().enumerate() {
                    fill_matrix(seed, orig, self.n1, self.n2, self.symmetric, &mut buf);
                    f(i, &buf);
                }
            }
        }
    }

    fn check_matrix(&self, x: &DMatrix<f64>, context: &'static str) -> Result<()> {
        if x.shape() != (self.n1, self.n2) {
            return Err(Error::dims(
                context,
                format!("{}x{}", self.n1, self.n2),
                format!("{}x{}", x.nrows(), x.ncols()),
            ));
        }
        Ok(())
    }

    /// `A(X)`.
    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        self.check_matrix(x, "SensingOperator::apply")?;
        let mut out = DVector::zeros(self.m);
        let xs = x.as_slice();
        self.for_each_block(|i, a| out[i] = dot(a, xs));
        Ok(out)
    }

    /// `A^*(v) = sum_i v_i A_i` (unnormalized).
    pub fn adjoint(&self, v: &DVector<f64>) -> Result<DMatrix<f64>> {
        if v.len() != self.m {
            return Err(Error::dims("SensingOperator::adjoint", self.m, v.len()));
        }
        let mut out = DMatrix::zeros(self.n1, self.n2);
        let acc = out.as_mut_slice();
        self.for_each_block(|i, a| {
            if v[i] != 0.0 {
                axpy(v[i], a, acc);
            }
        });
        Ok(out)
    }

    /// Operator over the matrices indexed by `keep` (0-based), in the given order.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::config("restriction to an empty index set"));
        }
        if let Some(&bad) = keep.iter().find(|&&i| i >= self.m) {
            return Err(Error::config(format!(
                "restriction index {bad} out of range for m = {}",
                self.m
            )));
        }
        let storage = match &self.storage {
            Storage::Dense(data) => {
                let len = self.n1 * self.n2;
                let mut out = Vec::with_capacity(keep.len() * len);
                for &i in keep {
                    out.extend_from_slice(&data[i * len..(i + 1) * len]);
                }
                Storage::Dense(out)
            }
            Storage::OnTheFly(indices) => {
                Storage::OnTheFly(keep.iter().map(|&i| indices[i]).collect())
            }
        };
        Ok(Self {
            m: keep.len(),
            storage,
            ..self.clone_header()
        })
    }

    fn clone_header(&self) -> Self {
        Self {
            n1: self.n1,
            n2: self.n2,
            m: self.m,
            symmetric: self.symmetric,
            seed: self.seed,
            storage: Storage::OnTheFly(Vec::new()),
        }
    }

    /// Metadata record used by the on-disk instance format.
    pub fn meta(&self) -> OperatorMeta {
        OperatorMeta {
            n1: self.n1,
            n2: self.n2,
            m: self.m,
            seed: self.seed,
            symmetric: self.symmetric,
        }
    }

    /// Rebuilds a seeded operator from its metadata.
    pub fn from_meta(meta: &OperatorMeta) -> Result<Self> {
        let seed = meta
            .seed
            .ok_or_else(|| Error::config("operator metadata carries no seed"))?;
        Self::generate(meta.n1, meta.n2, meta.m, seed, meta.symmetric)
    }
}

/// Serializable operator description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub n1: usize,
    pub n2: usize,
    pub m: usize,
    pub seed: Option<u64>,
    pub symmetric: bool,
}

/// How the ground truth is factored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factorization {
    /// `X* = U* U*^T`.
    Psd,
    /// `X* = U* V*^T`.
    General,
}

/// Distribution of the sensing matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    Gaussian,
    SymmetricGaussian,
}

/// Parameters of a synthetic recovery problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub n1: usize,
    pub n2: usize,
    pub r: usize,
    pub p: f64,
    pub m: usize,
    #[serde(default = "default_outlier_std")]
    pub outlier_std: f64,
    pub seed: u64,
    pub factorization: Factorization,
    pub ensemble: Ensemble,
}

fn default_outlier_std() -> f64 {
    10.0
}

impl ProblemConfig {
    /// PSD problem with a Gaussian operator and the default outlier scale.
    pub fn psd(n: usize, r: usize, p: f64, m: usize, seed: u64) -> Self {
        Self {
            n1: n,
            n2: n,
            r,
            p,
            m,
            outlier_std: default_outlier_std(),
            seed,
            factorization: Factorization::Psd,
            ensemble: Ensemble::Gaussian,
        }
    }

    /// General rectangular problem with a Gaussian operator.
    pub fn general(n1: usize, n2: usize, r: usize, p: f64, m: usize, seed: u64) -> Self {
        Self {
            factorization: Factorization::General,
            n1,
            n2,
            ..Self::psd(n1, r, p, m, seed)
        }
    }
}

/// Number of corrupted measurements, `floor(p * m)`.
///
/// The tiny offset absorbs representation error in ratios such as
/// `0.29 * 100 = 28.999999999999996`.
pub fn outlier_count(p: f64, m: usize) -> usize {
    ((p * m as f64) + 1e-9).floor() as usize
}

/// A ground truth, its outlier-corrupted measurements and the operator.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub operator: SensingOperator,
    pub r: usize,
    /// `U*`, `n1 x r`.
    pub ustar: DMatrix<f64>,
    /// `V*`, `n2 x r`; absent in the PSD case.
    pub vstar: Option<DMatrix<f64>>,
    pub xstar: DMatrix<f64>,
    /// `s*`, zero off the support.
    pub outliers: DVector<f64>,
    /// Support of `s*`, 0-based and sorted.
    pub support: Vec<usize>,
    pub p: f64,
    pub y: DVector<f64>,
}

/// Draws `k` distinct indices from `0..m` by a partial Fisher–Yates shuffle.
fn sample_without_replacement(m: usize, k: usize, stream: &mut Stream) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..m).collect();
    for i in 0..k {
        let j = i + stream.below(m - i);
        pool.swap(i, j);
    }
    let mut chosen = pool[..k].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Draws a synthetic instance: Gaussian ground-truth factors, operator,
/// outlier support and magnitudes, all from substreams of `cfg.seed`.
pub fn generate_problem(cfg: &ProblemConfig) -> Result<ProblemInstance> {
    check_config(cfg)?;
    let ustar = gaussian_matrix(
        cfg.n1,
        cfg.r,
        1.0,
        &mut Stream::new(cfg.seed, tag::GROUND_TRUTH_U, 0),
    );
    let vstar = match cfg.factorization {
        Factorization::Psd => None,
        Factorization::General => Some(gaussian_matrix(
            cfg.n2,
            cfg.r,
            1.0,
            &mut Stream::new(cfg.seed, tag::GROUND_TRUTH_V, 0),
        )),
    };
    generate_with_factors(cfg, ustar, vstar)
}

fn check_config(cfg: &ProblemConfig) -> Result<()> {
    if !(0.0..1.0).contains(&cfg.p) {
        return Err(Error::config(format!(
            "outlier ratio p = {} not in [0, 1)",
            cfg.p
        )));
    }
    if cfg.r == 0 || cfg.r > cfg.n1.min(cfg.n2) {
        return Err(Error::config(format!(
            "rank r = {} must lie in 1..={}",
            cfg.r,
            cfg.n1.min(cfg.n2)
        )));
    }
    if !(cfg.outlier_std >= 0.0) {
        return Err(Error::config("outlier_std must be nonnegative"));
    }
    if cfg.factorization == Factorization::Psd && cfg.n1 != cfg.n2 {
        return Err(Error::config("PSD problems need n1 == n2"));
    }
    Ok(())
}

/// Like [`generate_problem`] but with prescribed ground-truth factors
/// (`vstar = None` for PSD).
pub fn generate_with_factors(
    cfg: &ProblemConfig,
    ustar: DMatrix<f64>,
    vstar: Option<DMatrix<f64>>,
) -> Result<ProblemInstance> {
    check_config(cfg)?;
    if ustar.shape() != (cfg.n1, cfg.r) {
        return Err(Error::dims(
            "U*",
            format!("{}x{}", cfg.n1, cfg.r),
            format!("{}x{}", ustar.nrows(), ustar.ncols()),
        ));
    }
    if let Some(v) = &vstar {
        if v.shape() != (cfg.n2, cfg.r) {
            return Err(Error::dims(
                "V*",
                format!("{}x{}", cfg.n2, cfg.r),
                format!("{}x{}", v.nrows(), v.ncols()),
            ));
        }
    }
    if (cfg.factorization == Factorization::Psd) != vstar.is_none() {
        return Err(Error::config(
            "V* must be given exactly for general factorizations",
        ));
    }

    let operator = match cfg.ensemble {
        Ensemble::Gaussian => gaussian_operator(cfg.n1, cfg.n2, cfg.m, cfg.seed)?,
        Ensemble::SymmetricGaussian => {
            if cfg.n1 != cfg.n2 {
                return Err(Error::config("symmetric sensing needs n1 == n2"));
            }
            symmetric_gaussian_operator(cfg.n1, cfg.m, cfg.seed)?
        }
    };

    let xstar = match &vstar {
        None => &ustar * ustar.transpose(),
        Some(v) => &ustar * v.transpose(),
    };

    let k = outlier_count(cfg.p, cfg.m);
    let support = sample_without_replacement(cfg.m, k, &mut Stream::new(cfg.seed, tag::SUPPORT, 0));
    let mut outliers = DVector::zeros(cfg.m);
    let mut stream = Stream::new(cfg.seed, tag::OUTLIERS, 0);
    for &i in &support {
        outliers[i] = cfg.outlier_std * stream.normal();
    }

    let clean = operator.apply(&xstar)?;
    let y = &clean + &outliers;
    Ok(ProblemInstance {
        operator,
        r: cfg.r,
        ustar,
        vstar,
        xstar,
        outliers,
        support,
        p: cfg.p,
        y,
    })
}

impl ProblemInstance {
    /// Assembles an instance from explicit parts; `y` is recomputed.
    pub fn from_parts(
        operator: SensingOperator,
        ustar: DMatrix<f64>,
        vstar: Option<DMatrix<f64>>,
        outliers: DVector<f64>,
    ) -> Result<Self> {
        let xstar = match &vstar {
            None => &ustar * ustar.transpose(),
            Some(v) => &ustar * v.transpose(),
        };
        if outliers.len() != operator.m() {
            return Err(Error::dims(
                "ProblemInstance::from_parts",
                operator.m(),
                outliers.len(),
            ));
        }
        let support: Vec<usize> = (0..outliers.len())
            .filter(|&i| outliers[i] != 0.0)
            .collect();
        let p = support.len() as f64 / operator.m() as f64;
        let y = operator.apply(&xstar)? + &outliers;
        Ok(Self {
            r: ustar.ncols(),
            operator,
            ustar,
            vstar,
            xstar,
            outliers,
            support,
            p,
            y,
        })
    }

    pub fn is_psd(&self) -> bool {
        self.vstar.is_none()
    }

    pub fn m(&self) -> usize {
        self.operator.m()
    }

    /// Complement of the outlier support, 0-based.
    pub fn inlier_indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.m() - self.support.len());
        let mut it = self.support.iter().peekable();
        for i in 0..self.m() {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                out.push(i);
            }
        }
        out
    }

    /// Balanced ground-truth factors `(Phi Sigma^{1/2}, Psi Sigma^{1/2})`
    /// from the rank-`r` SVD of `X*`. For PSD instances `U*` itself.
    pub fn balanced_ground_truth(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        match &self.vstar {
            None => (self.ustar.clone(), self.ustar.clone()),
            Some(_) => crate::linalg::truncated_svd(&self.xstar, self.r).balanced_factors(),
        }
    }

    /// Stacked balanced ground truth `W* = (U*; V*)`.
    pub fn wstar(&self) -> DMatrix<f64> {
        let (u, v) = self.balanced_ground_truth();
        crate::linalg::vstack(&u, &v)
    }

    /// `||y - (A(X*) + s*)||_inf`; zero for every generated instance.
    pub fn measurement_residual(&self) -> Result<f64> {
        let clean = self.operator.apply(&self.xstar)?;
        let expected = &clean + &self.outliers;
        Ok((&self.y - expected).amax())
    }

    /// Optimal value `||s*||_1 / m` of the l1 objectives under exact recovery.
    pub fn optimal_l1_value(&self) -> f64 {
        self.outliers.iter().map(|s| s.abs()).sum::<f64>() / self.m() as f64
    }
}

/// Spread of normalized l1 measurement norms over sampled unit-Frobenius
/// low-rank matrices.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RipEstimate {
    pub delta_hat: f64,
    pub lo: f64,
    pub hi: f64,
    pub mean: f64,
    pub samples: usize,
    pub rank_tested: usize,
}

/// Statistics of `t = ||A(X)||_1 / (m ||X||_F)` over the given matrices.
pub fn rip_statistics(
    op: &SensingOperator,
    matrices: &[DMatrix<f64>],
    rank_tested: usize,
) -> Result<RipEstimate> {
    if matrices.is_empty() {
        return Err(Error::config("RIP probe needs at least one sample"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for x in matrices {
        let norm = x.norm();
        if norm == 0.0 {
            return Err(Error::Numerical("zero matrix in RIP probe".into()));
        }
        let t = op.apply(x)?.lp_norm(1) / (op.m() as f64 * norm);
        lo = lo.min(t);
        hi = hi.max(t);
        sum += t;
    }
    let c = mean_abs_gaussian();
    Ok(RipEstimate {
        delta_hat: (c - lo).max(hi - c).max(0.0),
        lo,
        hi,
        mean: sum / matrices.len() as f64,
        samples: matrices.len(),
        rank_tested,
    })
}

/// Monte-Carlo estimate of the l1/l2-RIP deviation over random
/// rank-`2r` matrices `G H^T / ||G H^T||_F`.
pub fn estimate_rip_delta(
    op: &SensingOperator,
    r: usize,
    samples: usize,
    seed: u64,
) -> Result<RipEstimate> {
    if samples == 0 {
        return Err(Error::config("RIP probe needs at least one sample"));
    }
    let k = 2 * r;
    if r == 0 || k > op.n1().min(op.n2()) {
        return Err(Error::config(format!(
            "rank 2r = {k} exceeds min(n1, n2) = {}",
            op.n1().min(op.n2())
        )));
    }
    let mut stream = Stream::new(seed, tag::RIP_PROBE, 0);
    let matrices: Vec<DMatrix<f64>> = (0..samples)
        .map(|_| {
            let g = gaussian_matrix(op.n1(), k, 1.0, &mut stream);
            let h = gaussian_matrix(op.n2(), k, 1.0, &mut stream);
            let x = g * h.transpose();
            let norm = x.norm();
            x / norm
        })
        .collect();
    rip_statistics(op, &matrices, k)
}
