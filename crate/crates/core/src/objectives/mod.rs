//! The l1 recovery objectives over factored iterates, the smooth l2
//! baseline, and the closed-form regularity constants.

mod landscape;
mod params;

pub use landscape::{landscape_slice, LandscapeGrid, Loss, SliceSpec, DEFAULT_CAP};
pub use params::{
    kappa_general, kappa_psd, lambda_recommended, max_outlier_ratio, sharpness_general,
    sharpness_psd, weakconvexity_general, weakconvexity_psd, RegularityParams, SharpnessMode,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, vsplit, vstack};
use crate::operators::{ProblemInstance, SensingOperator};

/// `Sign` with `Sign(0) = 0`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// A function of a matrix iterate with one deterministic subgradient
/// selection.
pub trait Objective {
    /// Shape of the iterate.
    fn shape(&self) -> (usize, usize);

    fn value(&self, x: &DMatrix<f64>) -> Result<f64>;

    fn value_and_subgradient(&self, x: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)>;

    fn subgradient(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(self.value_and_subgradient(x)?.1)
    }

    fn check(&self, x: &DMatrix<f64>, context: &'static str) -> Result<()> {
        let (r, c) = self.shape();
        if x.shape() != (r, c) {
            return Err(Error::dims(
                context,
                format!("{r}x{c}"),
                format!("{}x{}", x.nrows(), x.ncols()),
            ));
        }
        Ok(())
    }
}

/// Objective assembled from a pair of closures; used for scalar test
/// problems and ad-hoc losses.
pub struct FnObjective<V, G> {
    shape: (usize, usize),
    value: V,
    subgradient: G,
}

impl<V, G> FnObjective<V, G>
where
    V: Fn(&DMatrix<f64>) -> f64,
    G: Fn(&DMatrix<f64>) -> DMatrix<f64>,
{
    pub fn new(shape: (usize, usize), value: V, subgradient: G) -> Self {
        Self {
            shape,
            value,
            subgradient,
        }
    }
}

impl<V, G> Objective for FnObjective<V, G>
where
    V: Fn(&DMatrix<f64>) -> f64,
    G: Fn(&DMatrix<f64>) -> DMatrix<f64>,
{
    fn shape(&self) -> (usize, usize) {
        self.shape
    }

    fn value(&self, x: &DMatrix<f64>) -> Result<f64> {
        self.check(x, "FnObjective::value")?;
        Ok((self.value)(x))
    }

    fn value_and_subgradient(&self, x: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
        self.check(x, "FnObjective::subgradient")?;
        Ok(((self.value)(x), (self.subgradient)(x)))
    }
}

/// Sensing matrices folded onto the upper triangle: for a symmetric `X`,
/// `<A, X> = sum_{i<=j} w_ij x_ij` with `w_ii = a_ii` and
/// `w_ij = a_ij + a_ji`. Halves the work of every pass over the operator.
#[derive(Debug, Clone)]
struct PackedSymmetric {
    n: usize,
    len: usize,
    data: Vec<f64>,
}

impl PackedSymmetric {
    fn new(op: &SensingOperator) -> Self {
        let n = op.n1();
        let len = n * (n + 1) / 2;
        let mut data = Vec::with_capacity(op.m() * len);
        op.for_each_block(|_, a| {
            for j in 0..n {
                for i in 0..j {
                    data.push(a[j * n + i] + a[i * n + j]);
                }
                data.push(a[j * n + j]);
            }
        });
        Self { n, len, data }
    }

    fn pack(&self, x: &DMatrix<f64>) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len);
        for j in 0..self.n {
            for i in 0..=j {
                out.push(x[(i, j)]);
            }
        }
        out
    }

    /// `G + G^T` from the packed accumulation of `G = sum_i c_i A_i`.
    fn unpack_symmetrized(&self, g: &[f64]) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.n, self.n);
        let mut idx = 0;
        for j in 0..self.n {
            for i in 0..j {
                s[(i, j)] = g[idx];
                s[(j, i)] = g[idx];
                idx += 1;
            }
            s[(j, j)] = 2.0 * g[idx];
            idx += 1;
        }
        s
    }

    /// Returns `sum_i h(r_i)` and `(G + G^T)` with `G = sum_i w(r_i) A_i`,
    /// where `r_i = <A_i, X> - y_i`.
    fn residual_pass(
        &self,
        x: &DMatrix<f64>,
        y: &DVector<f64>,
        h: impl Fn(f64) -> f64,
        w: impl Fn(f64) -> f64,
    ) -> (f64, DMatrix<f64>) {
        let xp = self.pack(x);
        let mut acc = 0.0;
        let mut g = vec![0.0; self.len];
        for (i, a) in self.data.chunks_exact(self.len).enumerate() {
            let r = dot(a, &xp) - y[i];
            acc += h(r);
            let c = w(r);
            if c != 0.0 {
                axpy(c, a, &mut g);
            }
        }
        (acc, self.unpack_symmetrized(&g))
    }

    fn residual_sum(&self, x: &DMatrix<f64>, y: &DVector<f64>, h: impl Fn(f64) -> f64) -> f64 {
        let xp = self.pack(x);
        self.data
            .chunks_exact(self.len)
            .enumerate()
            .map(|(i, a)| h(dot(a, &xp) - y[i]))
            .sum()
    }
}

fn check_psd_data(op: &SensingOperator, y: &DVector<f64>, r: usize) -> Result<()> {
    if op.n1() != op.n2() {
        return Err(Error::config("the PSD objectives need a square operator"));
    }
    if y.len() != op.m() {
        return Err(Error::dims("measurements", op.m(), y.len()));
    }
    if r == 0 {
        return Err(Error::config("rank must be positive"));
    }
    Ok(())
}

/// `f(U) = (1/m) ||y - A(U U^T)||_1`.
#[derive(Debug, Clone)]
pub struct L1Psd {
    packed: PackedSymmetric,
    y: DVector<f64>,
    r: usize,
}

impl L1Psd {
    pub fn new(op: &SensingOperator, y: &DVector<f64>, r: usize) -> Result<Self> {
        check_psd_data(op, y, r)?;
        Ok(Self {
            packed: PackedSymmetric::new(op),
            y: y.clone(),
            r,
        })
    }

    pub fn from_instance(inst: &ProblemInstance) -> Result<Self> {
        Self::new(&inst.operator, &inst.y, inst.r)
    }
}

impl Objective for L1Psd {
    fn shape(&self) -> (usize, usize) {
        (self.packed.n, self.r)
    }

    fn value(&self, u: &DMatrix<f64>) -> Result<f64> {
        self.check(u, "L1Psd::value")?;
        let x = u * u.transpose();
        Ok(self.packed.residual_sum(&x, &self.y, f64::abs) / self.y.len() as f64)
    }

    fn value_and_subgradient(&self, u: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
        self.check(u, "L1Psd::subgradient")?;
        let x = u * u.transpose();
        let (sum, s) = self.packed.residual_pass(&x, &self.y, f64::abs, sign);
        let m = self.y.len() as f64;
        Ok((sum / m, (s * u) / m))
    }
}

/// `xi(U) = (1/m) ||y - A(U U^T)||_2^2`.
#[derive(Debug, Clone)]
pub struct L2Psd {
    packed: PackedSymmetric,
    y: DVector<f64>,
    r: usize,
}

impl L2Psd {
    pub fn new(op: &SensingOperator, y: &DVector<f64>, r: usize) -> Result<Self> {
        check_psd_data(op, y, r)?;
        Ok(Self {
            packed: PackedSymmetric::new(op),
            y: y.clone(),
            r,
        })
    }

    pub fn from_instance(inst: &ProblemInstance) -> Result<Self> {
        Self::new(&inst.operator, &inst.y, inst.r)
    }
}

impl Objective for L2Psd {
    fn shape(&self) -> (usize, usize) {
        (self.packed.n, self.r)
    }

    fn value(&self, u: &DMatrix<f64>) -> Result<f64> {
        self.check(u, "L2Psd::value")?;
        let x = u * u.transpose();
        Ok(self.packed.residual_sum(&x, &self.y, |r| r * r) / self.y.len() as f64)
    }

    fn value_and_subgradient(&self, u: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
        self.check(u, "L2Psd::gradient")?;
        let x = u * u.transpose();
        let (sum, s) = self.packed.residual_pass(&x, &self.y, |r| r * r, |r| r);
        let m = self.y.len() as f64;
        Ok((sum / m, (s * u) * (2.0 / m)))
    }
}

/// `g(W) = (1/m) ||y - A(U V^T)||_1 + lambda ||U^T U - V^T V||_F` over the
/// stacked iterate `W = (U; V)`.
#[derive(Debug, Clone)]
pub struct L1General<'a> {
    op: &'a SensingOperator,
    y: &'a DVector<f64>,
    r: usize,
    lambda: f64,
}

impl<'a> L1General<'a> {
    pub fn new(
        op: &'a SensingOperator,
        y: &'a DVector<f64>,
        r: usize,
        lambda: f64,
    ) -> Result<Self> {
        if y.len() != op.m() {
            return Err(Error::dims("measurements", op.m(), y.len()));
        }
        if !(lambda >= 0.0) {
            return Err(Error::config(format!(
                "lambda = {lambda} must be nonnegative"
            )));
        }
        if r == 0 {
            return Err(Error::config("rank must be positive"));
        }
        Ok(Self { op, y, r, lambda })
    }

    pub fn from_instance(inst: &'a ProblemInstance, lambda: f64) -> Result<Self> {
        Self::new(&inst.operator, &inst.y, inst.r, lambda)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn split(&self, w: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        vsplit(w, self.op.n1())
    }

    fn balance(u: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
        u.transpose() * u - v.transpose() * v
    }
}

impl Objective for L1General<'_> {
    fn shape(&self) -> (usize, usize) {
        (self.op.n1() + self.op.n2(), self.r)
    }

    fn value(&self, w: &DMatrix<f64>) -> Result<f64> {
        self.check(w, "L1General::value")?;
        let (u, v) = self.split(w);
        let x = &u * v.transpose();
        let xs = x.as_slice();
        let mut sum = 0.0;
        self.op
            .for_each_block(|i, a| sum += (dot(a, xs) - self.y[i]).abs());
        let reg = if self.lambda > 0.0 {
            self.lambda * Self::balance(&u, &v).norm()
        } else {
            0.0
        };
        Ok(sum / self.op.m() as f64 + reg)
    }

    fn value_and_subgradient(&self, w: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
        self.check(w, "L1General::subgradient")?;
        let (u, v) = self.split(w);
        let x = &u * v.transpose();
        let xs = x.as_slice();
        let mut sum = 0.0;
        let mut g = DMatrix::zeros(self.op.n1(), self.op.n2());
        let gs = g.as_mut_slice();
        self.op.for_each_block(|i, a| {
            let r = dot(a, xs) - self.y[i];
            sum += r.abs();
            let s = sign(r);
            if s != 0.0 {
                axpy(s, a, gs);
            }
        });
        let m = self.op.m() as f64;
        let mut du = (&g * &v) / m;
        let mut dv = (g.transpose() * &u) / m;
        let mut value = sum / m;
        if self.lambda > 0.0 {
            let (gu, gv) = (u.transpose() * &u, v.transpose() * &v);
            let c = &gu - &gv;
            let norm = c.norm();
            value += self.lambda * norm;
            // Below round-off level C is treated as zero and Psi = 0 selected.
            if norm > BALANCE_ZERO_TOL * (gu.norm() + gv.norm()) {
                let psi = &c / norm;
                let sym = &psi + psi.transpose();
                du += (&u * &sym) * self.lambda;
                dv -= (&v * &sym) * self.lambda;
            }
        }
        Ok((value, vstack(&du, &dv)))
    }
}

/// Relative size under which `U^T U - V^T V` counts as exactly balanced.
pub const BALANCE_ZERO_TOL: f64 = 1e-12;

/// `f(U)` on a PSD instance.
pub fn f_value(inst: &ProblemInstance, u: &DMatrix<f64>) -> Result<f64> {
    L1Psd::from_instance(inst)?.value(u)
}

/// The `Sign(0) = 0` subgradient selection of `f` at `U`.
pub fn f_subgrad(inst: &ProblemInstance, u: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    L1Psd::from_instance(inst)?.subgradient(u)
}

/// `g(W)` on a general instance.
pub fn g_value(inst: &ProblemInstance, w: &DMatrix<f64>, lambda: f64) -> Result<f64> {
    L1General::from_instance(inst, lambda)?.value(w)
}

pub fn g_subgrad(inst: &ProblemInstance, w: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    L1General::from_instance(inst, lambda)?.subgradient(w)
}

pub fn xi_value(inst: &ProblemInstance, u: &DMatrix<f64>) -> Result<f64> {
    L2Psd::from_instance(inst)?.value(u)
}

pub fn xi_grad(inst: &ProblemInstance, u: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    L2Psd::from_instance(inst)?.subgradient(u)
}
