//! Dense linear algebra helpers: rank, nullspaces, least squares and
//! principal angles between subspaces.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

/// Relative singular-value threshold used for ranks and nullspaces.
pub const RANK_RTOL: f64 = 1e-9;

/// Singular values in decreasing order together with the full right
/// singular basis (columns of `v`, same order).
pub struct FullSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

/// SVD that always returns a square `v` (ncols × ncols), padding short
/// matrices with zero rows.
pub fn full_svd(a: &DMatrix<f64>) -> FullSvd {
    let (m, n) = a.shape();
    if n == 0 {
        return FullSvd { u: DMatrix::zeros(m, 0), sigma: Vec::new(), v: DMatrix::zeros(0, 0) };
    }
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let rows = padded.nrows();
    let (u, s, vt) = checked_svd(&padded);
    let k = s.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let mut v = DMatrix::zeros(n, k);
    let mut uu = DMatrix::zeros(rows, k);
    let mut sigma = Vec::with_capacity(k);
    for (c, &i) in order.iter().enumerate() {
        sigma.push(s[i]);
        v.set_column(c, &vt.row(i).transpose());
        uu.set_column(c, &u.column(i));
    }
    let u = uu.rows(0, m).into_owned();
    FullSvd { u, sigma, v }
}

/// `(U, σ, Vᵀ)` of a matrix with at least as many rows as columns.
///
/// nalgebra's bidiagonal SVD occasionally returns a factorization that does
/// not reproduce a rank-deficient input (errors of order 1e-2 on 3×3
/// matrices), so the result is checked and replaced by one-sided Jacobi when
/// it is off.
fn checked_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v requested");
    let rec = &u * DMatrix::from_diagonal(&svd.singular_values) * &vt;
    let scale = a.amax().max(f64::MIN_POSITIVE);
    if (rec - a).amax() <= 1e3 * f64::EPSILON * scale * a.ncols().max(1) as f64 {
        return (u, svd.singular_values.iter().copied().collect(), vt);
    }
    jacobi_svd(a)
}

/// One-sided (Hestenes) Jacobi SVD for `nrows ≥ ncols`. Columns of `U` for
/// zero singular values are zero.
fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for i in 0..m.nrows() {
                        let (x, y) = (m[(i, p)], m[(i, q)]);
                        m[(i, p)] = c * x - s * y;
                        m[(i, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..n).map(|k| w.column(k).norm()).collect();
    let mut u = DMatrix::zeros(w.nrows(), n);
    for (k, &s) in sigma.iter().enumerate() {
        if s > 0.0 {
            u.set_column(k, &(w.column(k) / s));
        }
    }
    (u, sigma, v.transpose())
}

/// Absolute threshold below which a singular value counts as zero.
///
/// Relative to the largest singular value, floored at an absolute scale of
/// one so that round-off noise in an exactly vanishing matrix is not
/// promoted to rank.
pub fn rank_threshold(sigma: &[f64]) -> f64 {
    let smax = sigma.first().copied().unwrap_or(0.0);
    RANK_RTOL * smax.max(1.0)
}

pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s = if a.nrows() >= a.ncols() { checked_svd(a).1 } else { checked_svd(&a.transpose()).1 };
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn rank(a: &DMatrix<f64>) -> usize {
    let s = singular_values(a);
    let tol = rank_threshold(&s);
    s.iter().filter(|&&x| x > tol).count()
}

/// Smallest singular value among the `ncols` directions (zero when the
/// matrix has fewer rows than columns).
pub fn min_singular_value(a: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 {
        return f64::INFINITY;
    }
    if a.nrows() < a.ncols() {
        return 0.0;
    }
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// Orthonormal basis of the nullspace, as columns.
pub fn nullspace(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let svd = full_svd(a);
    let tol = rank_threshold(&svd.sigma);
    let r = svd.sigma.iter().filter(|&&x| x > tol).count();
    svd.v.columns(r, n - r).into_owned()
}

/// Orthonormal basis of the column space.
pub fn orth(a: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    if a.ncols() == 0 || m == 0 {
        return DMatrix::zeros(m, 0);
    }
    let at = a.transpose();
    let svd = full_svd(&at);
    let tol = rank_threshold(&svd.sigma);
    let r = svd.sigma.iter().filter(|&&x| x > tol).count();
    svd.v.columns(0, r).into_owned()
}

/// Minimum-norm least-squares solution of `a x = b` and the residual norm.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let n = a.ncols();
    if n == 0 {
        return (DVector::zeros(0), b.norm());
    }
    let svd = full_svd(a);
    let tol = rank_threshold(&svd.sigma);
    let mut x = DVector::zeros(n);
    for (i, &s) in svd.sigma.iter().enumerate() {
        if s > tol && i < svd.u.ncols() {
            let c = svd.u.column(i).dot(b) / s;
            x += svd.v.column(i) * c;
        }
    }
    let res = (a * &x - b).norm();
    (x, res)
}

/// Largest principal angle between the column spans of `a` and `b`.
///
/// Computed through `sin θ = ‖(I − Q_a Q_aᵀ) Q_b‖₂`, which stays accurate for
/// small angles. Spans of different dimension are at angle π/2.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = orth(a);
    let qb = orth(b);
    if qa.ncols() != qb.ncols() {
        return core::f64::consts::FRAC_PI_2;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    let resid = &qb - &qa * (qa.transpose() * &qb);
    let s = singular_values(&resid).first().copied().unwrap_or(0.0);
    libm::asin(s.min(1.0))
}

/// Spectral norm.
pub fn op_norm(a: &DMatrix<f64>) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Stack matrices with equal column counts vertically.
pub fn vstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let n = blocks.first().map_or(0, |b| b.ncols());
    let m: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(m, n);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), n, "vstack column mismatch");
        out.view_mut((r, 0), (b.nrows(), n)).copy_from(*b);
        r += b.nrows();
    }
    out
}

/// Concatenate matrices with equal row counts horizontally.
pub fn hstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let m = blocks.first().map_or(0, |b| b.nrows());
    let n: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(m, n);
    let mut c = 0;
    for b in blocks {
        assert_eq!(b.nrows(), m, "hstack row mismatch");
        out.view_mut((0, c), (m, b.ncols())).copy_from(*b);
        c += b.ncols();
    }
    out
}
