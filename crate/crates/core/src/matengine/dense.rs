//! Small dense complex linear algebra, generic over the real scalar.
//!
//! Double-precision callers normally go through nalgebra; these routines back the
//! extended-precision mode and are also run in `f64` by the tests.

use std::fmt::Debug;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Num, One, Zero};

use super::bigfloat::BigFloat;
use crate::error::{Error, Result};

pub trait Real: Clone + Debug + PartialOrd + Num + Neg<Output = Self> {
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self;
    fn exp(&self) -> Self;
    /// Unit roundoff of the working precision.
    fn epsilon() -> Self;
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
}

impl Real for BigFloat {
    fn from_f64(x: f64) -> Self {
        BigFloat::from_f64(x)
    }
    fn to_f64(&self) -> f64 {
        BigFloat::to_f64(self)
    }
    fn sqrt(&self) -> Self {
        BigFloat::sqrt(self)
    }
    fn abs(&self) -> Self {
        BigFloat::abs(self)
    }
    fn exp(&self) -> Self {
        BigFloat::exp(self)
    }
    fn epsilon() -> Self {
        BigFloat::epsilon()
    }
}

pub type Cx<T> = Complex<T>;

/// Row-major square matrix.
#[derive(Clone, Debug)]
pub struct Mat<T: Real> {
    pub n: usize,
    pub data: Vec<Cx<T>>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(n: usize) -> Self {
        Mat { n, data: vec![Cx::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Cx::one();
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Cx<T>) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Mat { n, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Cx<T> {
        &self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Cx<T>) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &Mat<T>) -> Mat<T> {
        let n = self.n;
        Mat::from_fn(n, |i, j| {
            let mut acc: Cx<T> = Cx::zero();
            for k in 0..n {
                acc = acc + self.get(i, k).clone() * other.get(k, j).clone();
            }
            acc
        })
    }

    pub fn adjoint(&self) -> Mat<T> {
        Mat::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }
}

fn cabs<T: Real>(z: &Cx<T>) -> T {
    z.norm_sqr().sqrt()
}

fn csqrt<T: Real>(z: &Cx<T>) -> Cx<T> {
    let r = cabs(z);
    if r.is_zero() {
        return Cx::zero();
    }
    let half = T::from_f64(0.5);
    let re = ((r.clone() + z.re.clone()) * half.clone()).sqrt();
    let mut im = ((r - z.re.clone()) * half).sqrt();
    if z.im < T::zero() {
        im = -im;
    }
    Cx::new(re, im)
}

fn scale<T: Real>(z: &Cx<T>, s: &T) -> Cx<T> {
    Cx::new(z.re.clone() * s.clone(), z.im.clone() * s.clone())
}

/// Cyclic complex Jacobi for a Hermitian matrix. Returns unsorted eigenvalues and
/// the unitary whose columns are the eigenvectors.
pub fn jacobi_hermitian<T: Real>(mut a: Mat<T>) -> Result<(Vec<T>, Mat<T>)> {
    let n = a.n;
    let mut v = Mat::identity(n);
    let total = a.frobenius();
    let tol = T::epsilon() * total.clone();
    for _sweep in 0..60 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a.get(p, q).norm_sqr();
            }
        }
        if off.sqrt() <= tol || total.is_zero() {
            let vals = (0..n).map(|i| a.get(i, i).re.clone()).collect();
            return Ok((vals, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q).clone();
                let mag = cabs(&apq);
                if mag <= T::epsilon() * T::epsilon() * total.clone() {
                    continue;
                }
                let w = Cx::new(apq.re.clone() / mag.clone(), apq.im.clone() / mag.clone());
                let app = a.get(p, p).re.clone();
                let aqq = a.get(q, q).re.clone();
                let tau = (aqq - app) / (T::from_f64(2.0) * mag);
                let t_abs = T::one() / (tau.abs() + (T::one() + tau.clone() * tau.clone()).sqrt());
                let t = if tau < T::zero() { -t_abs } else { t_abs };
                let c = T::one() / (T::one() + t.clone() * t.clone()).sqrt();
                let s = t * c.clone();
                let wb = w.conj();
                // U = [[c, s], [-conj(w) s, conj(w) c]] on (p, q); A <- U^* A U
                for k in 0..n {
                    let akp = a.get(k, p).clone();
                    let akq = a.get(k, q).clone();
                    a.set(k, p, scale(&akp, &c) - scale(&(wb.clone() * akq.clone()), &s));
                    a.set(k, q, scale(&akp, &s) + scale(&(wb.clone() * akq), &c));
                    let vkp = v.get(k, p).clone();
                    let vkq = v.get(k, q).clone();
                    v.set(k, p, scale(&vkp, &c) - scale(&(wb.clone() * vkq.clone()), &s));
                    v.set(k, q, scale(&vkp, &s) + scale(&(wb.clone() * vkq), &c));
                }
                for k in 0..n {
                    let apk = a.get(p, k).clone();
                    let aqk = a.get(q, k).clone();
                    a.set(p, k, scale(&apk, &c) - scale(&(w.clone() * aqk.clone()), &s));
                    a.set(q, k, scale(&apk, &s) + scale(&(w.clone() * aqk), &c));
                }
                a.set(p, q, Cx::zero());
                a.set(q, p, Cx::zero());
                let dp = a.get(p, p).re.clone();
                let dq = a.get(q, q).re.clone();
                a.set(p, p, Cx::new(dp, T::zero()));
                a.set(q, q, Cx::new(dq, T::zero()));
            }
        }
    }
    Err(Error::NoConvergence)
}

/// Reduces `a` to upper Hessenberg form `Z^* A Z` with Householder reflections.
fn hessenberg<T: Real>(a: &mut Mat<T>, z: &mut Mat<T>) {
    let n = a.n;
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let norm_x = (k + 1..n).fold(T::zero(), |acc, i| acc + a.get(i, k).norm_sqr()).sqrt();
        if norm_x.is_zero() {
            continue;
        }
        let x0 = a.get(k + 1, k).clone();
        let x0_abs = cabs(&x0);
        let phase = if x0_abs.is_zero() {
            Cx::one()
        } else {
            Cx::new(x0.re.clone() / x0_abs.clone(), x0.im.clone() / x0_abs.clone())
        };
        // v = x + phase * |x| e1, reflector H = I - 2 v v^* / (v^* v)
        let mut v: Vec<Cx<T>> = (k + 1..n).map(|i| a.get(i, k).clone()).collect();
        v[0] = v[0].clone() + scale(&phase, &norm_x);
        let vnorm2 = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        let two_over = T::from_f64(2.0) / vnorm2;
        // left: A <- H A on rows k+1..n
        for j in 0..n {
            let mut dot = Cx::zero();
            for (idx, vi) in v.iter().enumerate() {
                dot = dot + vi.conj() * a.get(k + 1 + idx, j).clone();
            }
            let f = scale(&dot, &two_over);
            for (idx, vi) in v.iter().enumerate() {
                let cur = a.get(k + 1 + idx, j).clone();
                a.set(k + 1 + idx, j, cur - vi.clone() * f.clone());
            }
        }
        // right: A <- A H and Z <- Z H on columns k+1..n
        for m in [&mut *a, &mut *z] {
            for i in 0..n {
                let mut dot = Cx::zero();
                for (idx, vi) in v.iter().enumerate() {
                    dot = dot + m.get(i, k + 1 + idx).clone() * vi.clone();
                }
                let f = scale(&dot, &two_over);
                for (idx, vi) in v.iter().enumerate() {
                    let cur = m.get(i, k + 1 + idx).clone();
                    m.set(i, k + 1 + idx, cur - f.clone() * vi.conj());
                }
            }
        }
        for i in (k + 2)..n {
            a.set(i, k, Cx::zero());
        }
    }
}

/// Givens rotation `G = [[c, s], [-conj(s), c]]` with `G [x; y] = [r; 0]`.
fn givens<T: Real>(x: &Cx<T>, y: &Cx<T>) -> (T, Cx<T>) {
    let ax = cabs(x);
    let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if r.is_zero() {
        return (T::one(), Cx::zero());
    }
    if ax.is_zero() {
        return (T::zero(), Cx::new(T::one(), T::zero()));
    }
    let c = ax.clone() / r.clone();
    let phase = Cx::new(x.re.clone() / ax.clone(), x.im.clone() / ax);
    let s = phase * y.conj();
    (c, Cx::new(s.re / r.clone(), s.im / r))
}

fn rotate_rows<T: Real>(m: &mut Mat<T>, k: usize, c: &T, s: &Cx<T>) {
    for j in 0..m.n {
        let a = m.get(k, j).clone();
        let b = m.get(k + 1, j).clone();
        m.set(k, j, scale(&a, c) + s.clone() * b.clone());
        m.set(k + 1, j, scale(&b, c) - s.conj() * a);
    }
}

fn rotate_cols<T: Real>(m: &mut Mat<T>, k: usize, c: &T, s: &Cx<T>) {
    for i in 0..m.n {
        let a = m.get(i, k).clone();
        let b = m.get(i, k + 1).clone();
        m.set(i, k, scale(&a, c) + s.conj() * b.clone());
        m.set(i, k + 1, scale(&b, c) - s.clone() * a);
    }
}

/// Complex Schur decomposition `A = Z T Z^*` with `T` upper triangular.
pub fn schur<T: Real>(a: &Mat<T>) -> Result<(Mat<T>, Mat<T>)> {
    let n = a.n;
    let mut h = a.clone();
    let mut z = Mat::identity(n);
    hessenberg(&mut h, &mut z);
    if n < 2 {
        return Ok((h, z));
    }
    let eps = T::epsilon();
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total_iter = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = cabs(h.get(l, l - 1));
            let diag = cabs(h.get(l, l)) + cabs(h.get(l - 1, l - 1));
            if sub <= eps.clone() * diag.clone() || (diag.is_zero() && sub.is_zero()) {
                h.set(l, l - 1, Cx::zero());
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total_iter += 1;
        if total_iter > 100 * n {
            return Err(Error::NoConvergence);
        }
        let shift = if iter % 11 == 10 {
            // exceptional shift
            h.get(hi, hi).clone() + Cx::new(cabs(h.get(hi, hi - 1)) * T::from_f64(0.75), T::zero())
        } else {
            let a11 = h.get(hi - 1, hi - 1).clone();
            let a12 = h.get(hi - 1, hi).clone();
            let a21 = h.get(hi, hi - 1).clone();
            let a22 = h.get(hi, hi).clone();
            let half = T::from_f64(0.5);
            let mean = scale(&(a11.clone() + a22.clone()), &half);
            let diff = scale(&(a11 - a22.clone()), &half);
            let root = csqrt(&(diff.clone() * diff + a12 * a21));
            let e1 = mean.clone() + root.clone();
            let e2 = mean - root;
            if cabs(&(e1.clone() - a22.clone())) <= cabs(&(e2.clone() - a22)) {
                e1
            } else {
                e2
            }
        };
        for k in l..hi {
            let (x, y) = if k == l {
                (h.get(l, l).clone() - shift.clone(), h.get(l + 1, l).clone())
            } else {
                (h.get(k, k - 1).clone(), h.get(k + 1, k - 1).clone())
            };
            let (c, s) = givens(&x, &y);
            rotate_rows(&mut h, k, &c, &s);
            rotate_cols(&mut h, k, &c, &s);
            rotate_cols(&mut z, k, &c, &s);
            if k > l {
                h.set(k + 1, k - 1, Cx::zero());
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            h.set(i, j, Cx::zero());
        }
    }
    Ok((h, z))
}

/// Unit-norm eigenvectors of `Z T Z^*` from its Schur form.
pub fn schur_eigenvectors<T: Real>(t: &Mat<T>, z: &Mat<T>) -> Mat<T> {
    let n = t.n;
    let tiny = T::epsilon() * t.frobenius().max_with_one();
    let mut out = Mat::zeros(n);
    for k in 0..n {
        let mut x: Vec<Cx<T>> = vec![Cx::zero(); n];
        x[k] = Cx::one();
        let tkk = t.get(k, k).clone();
        for j in (0..k).rev() {
            let mut acc: Cx<T> = Cx::zero();
            for m in (j + 1)..=k {
                acc = acc + t.get(j, m).clone() * x[m].clone();
            }
            let mut den = t.get(j, j).clone() - tkk.clone();
            if cabs(&den) < tiny {
                den = Cx::new(tiny.clone(), T::zero());
            }
            x[j] = -(acc / den);
        }
        let mut col: Vec<Cx<T>> = (0..n)
            .map(|i| (0..=k).fold(Cx::zero(), |acc, m| acc + z.get(i, m).clone() * x[m].clone()))
            .collect();
        let nrm = col.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()).sqrt();
        for c in col.iter_mut() {
            *c = Cx::new(c.re.clone() / nrm.clone(), c.im.clone() / nrm.clone());
        }
        for (i, c) in col.into_iter().enumerate() {
            out.set(i, k, c);
        }
    }
    out
}

trait MaxWithOne {
    fn max_with_one(self) -> Self;
}

impl<T: Real> MaxWithOne for T {
    fn max_with_one(self) -> Self {
        if self < T::one() {
            T::one()
        } else {
            self
        }
    }
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse<T: Real>(a: &Mat<T>) -> Result<Mat<T>> {
    let n = a.n;
    let mut m = a.clone();
    let mut inv = Mat::identity(n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                m.get(i, col)
                    .norm_sqr()
                    .partial_cmp(&m.get(j, col).norm_sqr())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if m.get(pivot, col).norm_sqr().is_zero() {
            return Err(Error::InvalidInput("singular matrix".into()));
        }
        if pivot != col {
            for j in 0..n {
                m.data.swap(pivot * n + j, col * n + j);
                inv.data.swap(pivot * n + j, col * n + j);
            }
        }
        let p = m.get(col, col).clone();
        for j in 0..n {
            let v = m.get(col, j).clone() / p.clone();
            m.set(col, j, v);
            let w = inv.get(col, j).clone() / p.clone();
            inv.set(col, j, w);
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m.get(i, col).clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                let v = m.get(i, j).clone() - f.clone() * m.get(col, j).clone();
                m.set(i, j, v);
                let w = inv.get(i, j).clone() - f.clone() * inv.get(col, j).clone();
                inv.set(i, j, w);
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, hermitian: bool) -> Mat<f64> {
        let mut m = Mat::from_fn(n, |i, j| {
            let x = (i * 7 + j * 3) as f64;
            Cx::new((x * 0.37).sin(), (x * 0.61 + 0.2).cos())
        });
        if hermitian {
            let adj = m.adjoint();
            m = Mat::from_fn(n, |i, j| (m.get(i, j) + adj.get(i, j)) * 0.5);
        }
        m
    }

    #[test]
    fn jacobi_reconstructs() {
        let a = sample(6, true);
        let (vals, v) = jacobi_hermitian(a.clone()).unwrap();
        let d = Mat::from_fn(6, |i, j| if i == j { Cx::new(vals[i], 0.0) } else { Cx::zero() });
        let rec = v.mul(&d).mul(&v.adjoint());
        let err = Mat::from_fn(6, |i, j| rec.get(i, j) - a.get(i, j)).frobenius();
        assert!(err < 1e-13 * a.frobenius(), "{err}");
    }

    #[test]
    fn schur_is_triangular_and_unitary() {
        let a = sample(7, false);
        let (t, z) = schur(&a).unwrap();
        let rec = z.mul(&t).mul(&z.adjoint());
        let err = Mat::from_fn(7, |i, j| rec.get(i, j) - a.get(i, j)).frobenius();
        assert!(err < 1e-12 * a.frobenius(), "{err}");
        let zz = z.adjoint().mul(&z);
        let err = Mat::from_fn(7, |i, j| zz.get(i, j) - Mat::<f64>::identity(7).get(i, j)).frobenius();
        assert!(err < 1e-12);
    }

    #[test]
    fn schur_vectors_are_eigenvectors() {
        let a = sample(5, false);
        let (t, z) = schur(&a).unwrap();
        let v = schur_eigenvectors(&t, &z);
        for k in 0..5 {
            let lam = t.get(k, k);
            for i in 0..5 {
                let av = (0..5).fold(Cx::<f64>::zero(), |acc, m| acc + a.get(i, m) * v.get(m, k));
                assert!((av - lam * v.get(i, k)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let a = sample(5, false);
        // the sample has low rank, so shift the diagonal
        let a = Mat::from_fn(5, |i, j| a.get(i, j) + if i == j { Cx::new(3.0, 0.0) } else { Cx::zero() });
        let inv = inverse(&a).unwrap();
        let p = a.mul(&inv);
        let err = Mat::from_fn(5, |i, j| p.get(i, j) - Mat::<f64>::identity(5).get(i, j)).frobenius();
        assert!(err < 1e-12);
    }
}
