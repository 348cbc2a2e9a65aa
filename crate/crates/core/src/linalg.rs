//! Dense helpers shared by the operator, objective and initialization code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::rng::Stream;

/// Inner product of two equally sized slices.
///
/// Four independent accumulators; the summation order is fixed so results
/// are bit-reproducible.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Frobenius inner product `<A, B>`.
pub fn frob_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    dot(a.as_slice(), b.as_slice())
}

/// Matrix of i.i.d. `N(0, scale^2)` entries, filled in column-major order.
pub fn gaussian_matrix(rows: usize, cols: usize, scale: f64, stream: &mut Stream) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for v in m.iter_mut() {
        *v = scale * stream.normal();
    }
    m
}

/// Leading `rank` singular triplets with singular values in decreasing order.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub left: DMatrix<f64>,
    pub values: DVector<f64>,
    pub right: DMatrix<f64>,
}

impl TruncatedSvd {
    /// `P diag(values)^{1/2}` and `Q diag(values)^{1/2}`.
    pub fn balanced_factors(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let roots = self.values.map(|s| s.max(0.0).sqrt());
        let mut u = self.left.clone();
        let mut v = self.right.clone();
        for (j, &s) in roots.iter().enumerate() {
            u.column_mut(j).scale_mut(s);
            v.column_mut(j).scale_mut(s);
        }
        (u, v)
    }
}

/// Index of the entry with largest magnitude; ties go to the lowest index.
fn argmax_abs<'a>(col: impl Iterator<Item = &'a f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, v) in col.enumerate() {
        if v.abs() > best_val {
            best_val = v.abs();
            best = i;
        }
    }
    best
}

/// Thin SVD `M = P diag(s) Q^T` with `min(n1, n2)` singular triplets in
/// decreasing order.
///
/// Computed from the eigendecomposition of `[[0, M], [M^T, 0]]`, whose
/// positive eigenpairs are `(s_j, (p_j; q_j) / sqrt 2)`. nalgebra's
/// bidiagonal SVD occasionally returns singular vectors that do not
/// reconstruct rank-deficient inputs. Vectors of (numerically) zero singular
/// values are completed to orthonormal bases.
pub fn thin_svd(m: &DMatrix<f64>) -> TruncatedSvd {
    let (n1, n2) = m.shape();
    let k = n1.min(n2);
    let mut aug = DMatrix::zeros(n1 + n2, n1 + n2);
    aug.view_mut((0, n1), (n1, n2)).copy_from(m);
    aug.view_mut((n1, 0), (n2, n1)).copy_from(&m.transpose());
    let eig = SymmetricEigen::new(aug);
    let mut order: Vec<usize> = (0..n1 + n2).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let top = order.first().map_or(0.0, |&i| eig.eigenvalues[i].max(0.0));
    let tol = (n1 + n2) as f64 * f64::EPSILON * top;

    let mut left = DMatrix::zeros(n1, k);
    let mut right = DMatrix::zeros(n2, k);
    let mut values = DVector::zeros(k);
    let mut rank = 0;
    for &src in order.iter().take(k) {
        let s = eig.eigenvalues[src];
        if !(s > tol) {
            break;
        }
        let col = eig.eigenvectors.column(src);
        let p = col.rows(0, n1).into_owned();
        let q = col.rows(n1, n2).into_owned();
        let (pn, qn) = (p.norm(), q.norm());
        left.set_column(rank, &(p / pn));
        right.set_column(rank, &(q / qn));
        values[rank] = s;
        rank += 1;
    }
    complete_basis(&mut left, rank);
    complete_basis(&mut right, rank);
    TruncatedSvd {
        left,
        values,
        right,
    }
}

/// Fills columns `filled..` of `basis` with an orthonormal completion of the
/// first `filled` (orthonormal) columns, drawn from the coordinate axes.
fn complete_basis(basis: &mut DMatrix<f64>, filled: usize) {
    let n = basis.nrows();
    let mut next = filled;
    for axis in 0..n {
        if next == basis.ncols() {
            break;
        }
        let mut v = DVector::zeros(n);
        v[axis] = 1.0;
        // Two Gram-Schmidt passes keep the result orthogonal to round-off.
        for _ in 0..2 {
            for j in 0..next {
                let c = basis.column(j).dot(&v);
                v.axpy(-c, &basis.column(j), 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.set_column(next, &(v / norm));
            next += 1;
        }
    }
}

/// Rank-`rank` truncation of [`thin_svd`].
///
/// Sign convention: the largest-magnitude entry of every left singular vector
/// is nonnegative (the paired right vector flips with it).
pub fn truncated_svd(m: &DMatrix<f64>, rank: usize) -> TruncatedSvd {
    let full = thin_svd(m);
    let k = rank.min(full.values.len());
    let mut left = DMatrix::zeros(m.nrows(), rank);
    let mut right = DMatrix::zeros(m.ncols(), rank);
    let mut values = DVector::zeros(rank);
    for j in 0..k {
        let mut l = full.left.column(j).into_owned();
        let mut r = full.right.column(j).into_owned();
        if l[argmax_abs(l.iter())] < 0.0 {
            l.neg_mut();
            r.neg_mut();
        }
        left.set_column(j, &l);
        right.set_column(j, &r);
        values[j] = full.values[j];
    }
    TruncatedSvd {
        left,
        values,
        right,
    }
}

/// Rank-`rank` factorization of a symmetric matrix from its eigendecomposition.
///
/// Eigenpairs are ranked by `|lambda|`; the returned values are the magnitudes,
/// so `left == right` and the output agrees with the SVD of the same matrix.
pub fn truncated_symmetric(m: &DMatrix<f64>, rank: usize) -> TruncatedSvd {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .partial_cmp(&eig.eigenvalues[a].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut left = DMatrix::zeros(n, rank);
    let mut values = DVector::zeros(rank);
    for (j, &src) in order.iter().take(rank.min(n)).enumerate() {
        let mut l = eig.eigenvectors.column(src).into_owned();
        if l[argmax_abs(l.iter())] < 0.0 {
            l.neg_mut();
        }
        left.set_column(j, &l);
        values[j] = eig.eigenvalues[src].abs();
    }
    TruncatedSvd {
        right: left.clone(),
        left,
        values,
    }
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// `r`-th largest singular value (1-based), zero if `r` exceeds the rank bound.
pub fn sigma_r(m: &DMatrix<f64>, r: usize) -> f64 {
    assert!(r >= 1, "sigma_r is 1-based");
    singular_values(m).get(r - 1).copied().unwrap_or(0.0)
}

/// Spectral norm.
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Haar-distributed orthogonal matrix via QR of a Gaussian matrix with the
/// sign of `R`'s diagonal absorbed into `Q`.
pub fn random_orthogonal(r: usize, stream: &mut Stream) -> DMatrix<f64> {
    let g = gaussian_matrix(r, r, 1.0, stream);
    let qr = g.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..r {
        if rr[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Stacks `top` over `bottom`.
pub fn vstack(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(top.ncols(), bottom.ncols(), "vstack column mismatch");
    let mut out = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.rows_mut(0, top.nrows()).copy_from(top);
    out.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    out
}

/// Splits a stacked matrix after its first `top_rows` rows.
pub fn vsplit(w: &DMatrix<f64>, top_rows: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    (
        w.rows(0, top_rows).into_owned(),
        w.rows(top_rows, w.nrows() - top_rows).into_owned(),
    )
}

/// Median with the even-length convention of averaging the two central
/// order statistics. Returns `None` for an empty slice.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    #[test]
    fn dot_matches_naive_sum() {
        let a: Vec<f64> = (0..11).map(|i| i as f64 * 0.5).collect();
        let b: Vec<f64> = (0..11).map(|i| 1.0 - i as f64).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-12);
    }

    #[test]
    fn median_conventions() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
    }

    #[test]
    fn truncated_svd_reconstructs_low_rank() {
        let mut s = Stream::new(3, 0, 0);
        let g = gaussian_matrix(6, 2, 1.0, &mut s);
        let h = gaussian_matrix(5, 2, 1.0, &mut s);
        let x = &g * h.transpose();
        let t = truncated_svd(&x, 2);
        let recon = &t.left * DMatrix::from_diagonal(&t.values) * t.right.transpose();
        assert!((recon - &x).norm() < 1e-10 * x.norm());
        assert!(t.values[0] >= t.values[1]);
        let (u, v) = t.balanced_factors();
        assert!((u.transpose() * &u - v.transpose() * &v).norm() < 1e-10);
        for j in 0..2 {
            let col = t.left.column(j);
            assert!(col[argmax_abs(col.iter())] >= 0.0);
        }
    }

    #[test]
    fn thin_svd_handles_rank_deficiency() {
        let mut s = Stream::new(11, 0, 0);
        for _ in 0..300 {
            let g = gaussian_matrix(6, 2, 1.0, &mut s);
            let h = gaussian_matrix(5, 2, 1.0, &mut s);
            let x = &g * h.transpose();
            let t = thin_svd(&x);
            assert_eq!(t.values.len(), 5);
            let recon = &t.left * DMatrix::from_diagonal(&t.values) * t.right.transpose();
            assert!((recon - &x).norm() < 1e-12 * x.norm());
            assert!((t.left.transpose() * &t.left - DMatrix::identity(5, 5)).norm() < 1e-12);
            assert!((t.right.transpose() * &t.right - DMatrix::identity(5, 5)).norm() < 1e-12);
        }
        let z = thin_svd(&DMatrix::zeros(3, 2));
        assert_eq!(z.values.as_slice(), &[0.0, 0.0]);
        assert!((z.right.transpose() * &z.right - DMatrix::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn symmetric_truncation_uses_magnitudes() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -3.0, 2.0]));
        let t = truncated_symmetric(&m, 2);
        assert_eq!(t.values.as_slice(), &[3.0, 2.0]);
        assert_eq!(t.left, t.right);
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut s = Stream::new(9, 9, 9);
        let q = random_orthogonal(4, &mut s);
        assert!((q.transpose() * &q - DMatrix::identity(4, 4)).norm() < 1e-12);
    }
}
