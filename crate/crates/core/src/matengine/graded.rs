//! Singular values of badly scaled products to high relative accuracy.
//!
//! One-sided Jacobi on a matrix `B D` with `B` well conditioned and `D` diagonal
//! recovers every singular value with relative error `O(eps cond(B))`, however
//! wide the spread of `D`. The product routine reduces `X diag(d) Y` to that form
//! with a column-pivoted QR, following Demmel's algorithm for structured SVDs.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::types::ComplexMatrix;

const MAX_SWEEPS: usize = 80;

/// Orthogonalizes the columns of `g` in place by complex one-sided Jacobi rotations,
/// accumulating the right rotations into `v` when given. Returns the column norms,
/// which are the singular values in the column order of `g`.
pub fn one_sided_jacobi(g: &mut ComplexMatrix, mut v: Option<&mut ComplexMatrix>) -> Result<Vec<f64>> {
    let m = g.ncols();
    let tol = f64::EPSILON * (g.nrows() as f64).sqrt();
    if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NoConvergence);
    }
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let app = g.column(p).norm_squared();
                let aqq = g.column(q).norm_squared();
                let apq = g.column(p).dotc(&g.column(q));
                let mag = apq.norm();
                if mag == 0.0 || mag <= tol * app.sqrt() * aqq.sqrt() {
                    continue;
                }
                rotated = true;
                let w = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + tau.hypot(1.0));
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let wb = w.conj();
                rotate(g, p, q, c, s, wb);
                if let Some(v) = v.as_deref_mut() {
                    rotate(v, p, q, c, s, wb);
                }
            }
        }
        if !rotated {
            return Ok((0..m).map(|k| g.column(k).norm()).collect());
        }
    }
    Err(Error::NoConvergence)
}

fn rotate(m: &mut ComplexMatrix, p: usize, q: usize, c: f64, s: f64, wb: Complex64) {
    for k in 0..m.nrows() {
        let a = m[(k, p)];
        let b = m[(k, q)];
        m[(k, p)] = a * c - wb * b * s;
        m[(k, q)] = a * s + wb * b * c;
    }
}

/// Householder QR with column pivoting by remaining column norm: `A P = Q R`.
/// Returns `(Q, R, perm)` where column `k` of `A P` is column `perm[k]` of `A`.
pub fn qr_col_pivot(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix, Vec<usize>) {
    let (rows, cols) = a.shape();
    let mut r = a.clone();
    let mut q = DMatrix::<Complex64>::identity(rows, rows);
    let mut perm: Vec<usize> = (0..cols).collect();
    for k in 0..rows.min(cols) {
        let (best, _) = (k..cols)
            .map(|j| (j, r.view((k, j), (rows - k, 1)).norm_squared()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best != k {
            r.swap_columns(k, best);
            perm.swap(k, best);
        }
        let x = r.view((k, k), (rows - k, 1)).clone_owned();
        let norm_x = x.norm();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let mut v = x;
        v[0] += phase * norm_x;
        let vn2 = v.norm_squared();
        // H = I - 2 v v^* / |v|^2, applied to R from the left and Q from the right
        for j in k..cols {
            let dot: Complex64 = (0..rows - k).map(|i| v[i].conj() * r[(k + i, j)]).sum();
            let f = dot * (2.0 / vn2);
            for i in 0..rows - k {
                r[(k + i, j)] -= v[i] * f;
            }
        }
        for i in 0..rows {
            let dot: Complex64 = (0..rows - k).map(|l| q[(i, k + l)] * v[l]).sum();
            let f = dot * (2.0 / vn2);
            for l in 0..rows - k {
                q[(i, k + l)] -= f * v[l].conj();
            }
        }
        for i in (k + 1)..rows {
            r[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    (q, r, perm)
}

/// Singular values of `X diag(exp(d)) Y`, sorted descending.
///
/// `X` and `Y` are square and moderately conditioned; all the dynamic range sits
/// in the exponents `d`.
pub fn product_singular_values(x: &ComplexMatrix, d: &[f64], y: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = x.nrows();
    if x.ncols() != n || y.nrows() != n || y.ncols() != n || d.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: d.len() });
    }
    let mut xd = x.clone();
    for (j, dj) in d.iter().enumerate() {
        let s = dj.exp();
        if !s.is_finite() {
            return Err(Error::Domain(format!("scale exp({dj}) overflows")));
        }
        xd.column_mut(j).scale_mut(s);
    }
    let (_q, r, perm) = qr_col_pivot(&xd);
    let py = DMatrix::from_fn(n, n, |i, j| y[(perm[i], j)]);
    // rows of R * P^T Y carry the grading, so orthogonalize the columns of its adjoint
    let mut w = (r * py).adjoint();
    let mut s = one_sided_jacobi(&mut w, None)?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}
