//! Linear-algebra contracts used by every other module.
//!
//! Double precision goes through nalgebra. The extended mode runs the generic
//! routines of [`dense`] over [`bigfloat::BigFloat`].

pub mod bigfloat;
pub mod dense;
pub mod graded;

use std::cmp::Ordering;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::types::{norm, ComplexMatrix};
use bigfloat::{with_precision, BigFloat};
use dense::{Cx, Mat, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Double,
    Extended { bits: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionConfig {
    pub mode: Precision,
    /// Largest admissible `|Im|` of a supposedly real eigenvalue, relative to `|M|`.
    pub tol_imag: f64,
    /// Largest admissible relative eigen residual.
    pub tol_residual: f64,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig { mode: Precision::Double, tol_imag: 1e-8, tol_residual: 1e-10 }
    }
}

impl PrecisionConfig {
    pub fn double() -> Self {
        Self::default()
    }

    pub fn extended(bits: u32) -> Result<Self> {
        let cfg = PrecisionConfig { mode: Precision::Extended { bits }, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Precision::Extended { bits } = self.mode {
            if bits < 64 {
                return Err(Error::InvalidParameter {
                    name: "precision",
                    reason: format!("extended mode needs at least 64 bits, got {bits}"),
                });
            }
        }
        if !(self.tol_imag > 0.0) || !(self.tol_residual > 0.0) {
            return Err(Error::InvalidParameter {
                name: "precision",
                reason: "tolerances must be positive".into(),
            });
        }
        Ok(())
    }
}

impl FromStr for PrecisionConfig {
    type Err = Error;

    /// Accepts `double` or `extended:<bits>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "double" {
            return Ok(Self::double());
        }
        if let Some(bits) = s.strip_prefix("extended:") {
            let bits: u32 = bits.parse().map_err(|_| Error::InvalidParameter {
                name: "precision",
                reason: format!("cannot parse bit count in `{s}`"),
            })?;
            return Self::extended(bits);
        }
        Err(Error::InvalidParameter {
            name: "precision",
            reason: format!("expected `double` or `extended:<bits>`, got `{s}`"),
        })
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Unit eigenvectors as columns, aligned with `values`.
    pub vectors: ComplexMatrix,
    /// `max_k |M v_k - mu_k v_k| / |M|`.
    pub residual: f64,
    /// Largest discarded imaginary part of an eigenvalue; zero for Hermitian input.
    pub imag_max: f64,
}

fn to_mat<T: Real>(m: &ComplexMatrix) -> Mat<T> {
    Mat::from_fn(m.nrows(), |i, j| Cx::new(T::from_f64(m[(i, j)].re), T::from_f64(m[(i, j)].im)))
}

fn from_mat<T: Real>(m: &Mat<T>) -> ComplexMatrix {
    DMatrix::from_fn(m.n, m.n, |i, j| {
        let z = m.get(i, j);
        Complex64::new(z.re.to_f64(), z.im.to_f64())
    })
}

fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(m.nrows())
}

/// Rotates each column so that its first entry of (near) maximal modulus is real positive.
fn normalize_phases(v: &mut ComplexMatrix) {
    for mut col in v.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col.unscale_mut(nrm);
        }
        let big = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if let Some(z) = col.iter().find(|z| z.norm() >= big * (1.0 - 1e-8)).copied() {
            let ph = z.conj() / z.norm();
            for x in col.iter_mut() {
                *x *= ph;
            }
        }
    }
}

fn lex_cmp(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Sorts eigenpairs by descending value; near-ties are ordered by eigenvector.
fn sort_pairs(values: Vec<f64>, vectors: ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let cols: Vec<Vec<Complex64>> = vectors.column_iter().map(|c| c.iter().copied().collect()).collect();
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| {
        if (values[i] - values[j]).abs() <= 1e-12 * scale {
            lex_cmp(&cols[j], &cols[i])
        } else {
            values[j].total_cmp(&values[i])
        }
    });
    let sorted_vals = idx.iter().map(|&i| values[i]).collect();
    let sorted_vecs = DMatrix::from_fn(vectors.nrows(), idx.len(), |r, c| vectors[(r, idx[c])]);
    (sorted_vals, sorted_vecs)
}

fn eigen_residual(m: &ComplexMatrix, values: &[f64], vectors: &ComplexMatrix) -> f64 {
    let scale = norm(m).max(f64::MIN_POSITIVE);
    values
        .iter()
        .enumerate()
        .map(|(k, &mu)| {
            let v = vectors.column(k);
            (m * v - v * Complex64::new(mu, 0.0)).norm()
        })
        .fold(0.0, f64::max)
        / scale
}

/// Eigen-decomposition of a Hermitian matrix.
pub fn eig_hermitian(m: &ComplexMatrix, prec: &PrecisionConfig) -> Result<EigenResult> {
    check_square(m)?;
    let dev = (m - m.adjoint()).norm();
    if dev > prec.tol_residual * norm(m) {
        return Err(Error::NotHermitian(dev));
    }
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let (values, mut vectors) = match prec.mode {
        Precision::Double => {
            let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or(Error::NoConvergence)?;
            (eig.eigenvalues.iter().copied().collect::<Vec<_>>(), eig.eigenvectors)
        }
        Precision::Extended { bits } => with_precision(bits, || {
            let (vals, vecs) = dense::jacobi_hermitian(to_mat::<BigFloat>(&sym))?;
            Ok::<_, Error>((vals.iter().map(|v| v.to_f64()).collect::<Vec<_>>(), from_mat(&vecs)))
        })?,
    };
    normalize_phases(&mut vectors);
    let (values, vectors) = sort_pairs(values, vectors);
    let residual = eigen_residual(m, &values, &vectors);
    if residual > prec.tol_residual {
        return Err(Error::Residual { residual, tol: prec.tol_residual });
    }
    Ok(EigenResult { values, vectors, residual, imag_max: 0.0 })
}

/// Largest `|mu_k + mu_{N-1-k}|` over the descending spectrum, relative to `max(1, max|mu|)`.
pub fn pm_pairing_residual(values: &[f64]) -> f64 {
    let big = values.len();
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    (0..big / 2)
        .map(|k| (values[k] + values[big - 1 - k]).abs())
        .fold(if big % 2 == 1 { values[big / 2].abs() } else { 0.0 }, f64::max)
        / scale
}

/// Eigen-decomposition of a diagonalizable matrix whose spectrum is known to be real.
///
/// With `pm_symmetric` the spectrum is also required to be closed under negation.
pub fn eig_general_real_spectrum(
    m: &ComplexMatrix,
    prec: &PrecisionConfig,
    pm_symmetric: bool,
) -> Result<EigenResult> {
    let n = check_square(m)?;
    let (diag, vectors) = match prec.mode {
        Precision::Double => {
            let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 0).ok_or(Error::NoConvergence)?;
            let (z, t) = schur.unpack();
            let (tm, zm) = (to_mat::<f64>(&t), to_mat::<f64>(&z));
            let v = dense::schur_eigenvectors(&tm, &zm);
            ((0..n).map(|k| t[(k, k)]).collect::<Vec<_>>(), from_mat(&v))
        }
        Precision::Extended { bits } => with_precision(bits, || {
            let (t, z) = dense::schur(&to_mat::<BigFloat>(m))?;
            let v = dense::schur_eigenvectors(&t, &z);
            let d = (0..n)
                .map(|k| Complex64::new(t.get(k, k).re.to_f64(), t.get(k, k).im.to_f64()))
                .collect::<Vec<_>>();
            Ok::<_, Error>((d, from_mat(&v)))
        })?,
    };
    let scale = norm(m).max(f64::MIN_POSITIVE);
    let imag = diag.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > prec.tol_imag * scale {
        return Err(Error::SpectrumNotReal(imag));
    }
    let mut vectors = vectors;
    normalize_phases(&mut vectors);
    let (values, vectors) = sort_pairs(diag.iter().map(|z| z.re).collect(), vectors);
    if pm_symmetric {
        let pr = pm_pairing_residual(&values);
        if n % 2 == 1 || pr > prec.tol_residual.max(prec.tol_imag) {
            return Err(Error::SpectrumAsymmetric(pr));
        }
    }
    let residual = eigen_residual(m, &values, &vectors);
    if residual > prec.tol_residual {
        return Err(Error::Residual { residual, tol: prec.tol_residual });
    }
    Ok(EigenResult { values, vectors, residual, imag_max: imag })
}

fn posdef_power(m: &ComplexMatrix, prec: &PrecisionConfig, power: f64) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(m, prec)?;
    let min = *eig.values.last().expect("nonempty");
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite(min));
    }
    let v = &eig.vectors;
    let mut scaled = v.clone();
    for (k, lam) in eig.values.iter().enumerate() {
        scaled.column_mut(k).scale_mut(lam.powf(power));
    }
    let s = scaled * v.adjoint();
    Ok((&s + s.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Hermitian positive square root.
pub fn sqrt_posdef(m: &ComplexMatrix, prec: &PrecisionConfig) -> Result<ComplexMatrix> {
    posdef_power(m, prec, 0.5)
}

/// Inverse of the Hermitian positive square root.
pub fn inv_sqrt_posdef(m: &ComplexMatrix, prec: &PrecisionConfig) -> Result<ComplexMatrix> {
    posdef_power(m, prec, -0.5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minors {
    /// `det M^(1), ..., det M^(k_max)`.
    pub values: Vec<Complex64>,
    /// Orders whose leading block is exactly singular.
    pub singular: Vec<usize>,
}

/// Leading principal minors up to order `k_max`, each by partially pivoted LU.
pub fn leading_principal_minors(m: &ComplexMatrix, k_max: usize) -> Result<Minors> {
    let big = check_square(m)?;
    if k_max > big {
        return Err(Error::DimensionMismatch { expected: big, got: k_max });
    }
    let mut values = Vec::with_capacity(k_max);
    let mut singular = Vec::new();
    for k in 1..=k_max {
        let det = m.view((0, 0), (k, k)).clone_owned().lu().determinant();
        if det.is_zero() {
            singular.push(k);
        }
        values.push(det);
    }
    Ok(Minors { values, singular })
}

/// Central-difference Jacobian of `f: R^m -> R^k` at `x`, returned as a `k x m` matrix.
///
/// The default step for coordinate `j` is `cbrt(eps) * max(1, |x_j|)`.
pub fn finite_diff_jacobian<F>(mut f: F, x: &[f64], step: Option<f64>) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let m = x.len();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut xp = x.to_vec();
    for j in 0..m {
        let h = step.unwrap_or_else(|| f64::EPSILON.cbrt() * x[j].abs().max(1.0));
        xp[j] = x[j] + h;
        let fp = f(&xp)?;
        xp[j] = x[j] - h;
        let fm = f(&xp)?;
        xp[j] = x[j];
        if fp.len() != fm.len() {
            return Err(Error::DimensionMismatch { expected: fp.len(), got: fm.len() });
        }
        cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect());
    }
    let k = cols.first().map_or(0, |c| c.len());
    if cols.iter().any(|c| c.len() != k) {
        return Err(Error::InvalidInput("function output length varies".into()));
    }
    Ok(DMatrix::from_fn(k, m, |i, j| cols[j][i]))
}
