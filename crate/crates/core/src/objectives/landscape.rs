use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{L1Psd, L2Psd, Objective};
use crate::error::{Error, Result};
use crate::operators::ProblemInstance;

/// Value reported for `-log(0)`.
pub const DEFAULT_CAP: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    L1,
    L2,
}

/// A planar slice through factor space: two coordinates of a rank-one
/// factor vary over the axes, the rest stay at `base`.
#[derive(Debug, Clone)]
pub struct SliceSpec {
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub coords: (usize, usize),
    /// Fixed remaining coordinates; zero when absent.
    pub base: Option<DMatrix<f64>>,
}

impl SliceSpec {
    /// `points x points` grid on `[lo, hi]^2` over the first two coordinates.
    pub fn square(lo: f64, hi: f64, points: usize) -> Self {
        let axis = linspace(lo, hi, points);
        Self {
            axis1: axis.clone(),
            axis2: axis,
            coords: (0, 1),
            base: None,
        }
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (points - 1) as f64;
            (0..points).map(|i| lo + h * i as f64).collect()
        }
    }
}

/// `-log(loss)` sampled on a grid; `values[i * axis2.len() + j]` belongs to
/// `(axis1[i], axis2[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeGrid {
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub values: Vec<f64>,
}

impl LandscapeGrid {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis2.len() + j]
    }

    /// Grid indices of the first maximal value.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = k;
            }
        }
        (best / self.axis2.len(), best % self.axis2.len())
    }

    /// `(u1, u2, value)` triples in row order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n2 = self.axis2.len();
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.axis1[k / n2], self.axis2[k % n2], v))
    }
}

/// Evaluates `-log(loss(U))` over the slice, clamped above at `cap`.
pub fn landscape_slice(
    inst: &ProblemInstance,
    spec: &SliceSpec,
    loss: Loss,
    cap: f64,
) -> Result<LandscapeGrid> {
    if spec.axis1.is_empty() || spec.axis2.is_empty() {
        return Err(Error::config("landscape grid is empty"));
    }
    if !inst.is_psd() || inst.r != 1 {
        return Err(Error::config(
            "landscape slices need a rank-one PSD instance",
        ));
    }
    let n = inst.operator.n1();
    let (c1, c2) = spec.coords;
    if c1 >= n || c2 >= n || c1 == c2 {
        return Err(Error::config(format!(
            "slice coordinates {c1}, {c2} invalid for n = {n}"
        )));
    }
    let objective: Box<dyn Objective> = match loss {
        Loss::L1 => Box::new(L1Psd::from_instance(inst)?),
        Loss::L2 => Box::new(L2Psd::from_instance(inst)?),
    };
    let mut u = match &spec.base {
        Some(b) => b.clone(),
        None => DMatrix::zeros(n, 1),
    };
    let mut values = Vec::with_capacity(spec.axis1.len() * spec.axis2.len());
    for &a in &spec.axis1 {
        for &b in &spec.axis2 {
            u[(c1, 0)] = a;
            u[(c2, 0)] = b;
            let v = objective.value(&u)?;
            values.push((-v.ln()).min(cap));
        }
    }
    Ok(LandscapeGrid {
        axis1: spec.axis1.clone(),
        axis2: spec.axis2.clone(),
        values,
    })
}
