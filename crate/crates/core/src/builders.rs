//! Scalar and matrix building blocks shared by both Lax formalisms.
//!
//! Index conventions: particle indices are 0-based, and a `2n x 2n` matrix is
//! split into `n x n` blocks so that index `a` pairs with `n + a`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::types::{Chamber, ComplexMatrix, ComplexVector, Couplings};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// The block anti-diagonal involution `C = [[0, 1], [1, 0]]` of size `2n`.
pub fn build_c(n: usize) -> ComplexMatrix {
    let big = 2 * n;
    DMatrix::from_fn(big, big, |i, j| if i + n == j || j + n == i { re(1.0) } else { re(0.0) })
}

/// `E = (1, ..., 1, -1, ..., -1)`.
pub fn build_e(n: usize) -> ComplexVector {
    DVector::from_fn(2 * n, |i, _| if i < n { re(1.0) } else { re(-1.0) })
}

/// `xi(V) = i mu (V V^* - 1) + i (mu - nu) C`.
pub fn build_xi(v: &ComplexVector, c: &Couplings) -> Result<ComplexMatrix> {
    let big = v.len();
    if big == 0 || big % 2 != 0 {
        return Err(Error::InvalidInput(format!("xi needs a vector of even length, got {big}")));
    }
    let outer = v * v.adjoint() - DMatrix::identity(big, big);
    Ok(outer * (I * c.mu()) + build_c(big / 2) * (I * (c.mu() - c.nu())))
}

/// `diag(x_1, ..., x_n, -x_1, ..., -x_n)`; this is `Q` for positions and `Lambda` for actions.
pub fn diag_pm(x: &[f64]) -> ComplexMatrix {
    let n = x.len();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i != j {
            re(0.0)
        } else if i < n {
            re(x[i])
        } else {
            re(-x[i - n])
        }
    })
}

pub fn build_q(q: &Chamber) -> ComplexMatrix {
    diag_pm(q.as_slice())
}

pub fn build_lambda(lambda: &Chamber) -> ComplexMatrix {
    diag_pm(lambda.as_slice())
}

/// The coefficient
/// `z_a = -(1 + i nu / l_a) prod_{b != a} (1 + 2 i mu / (l_a - l_b)) (1 + 2 i mu / (l_a + l_b))`.
pub fn z_factor(a: usize, lambda: &Chamber, c: &Couplings) -> Result<Complex64> {
    let n = lambda.len();
    if a >= n {
        return Err(Error::InvalidInput(format!("index {a} out of range for n = {n}")));
    }
    let l = lambda.as_slice();
    let mut z = -(re(1.0) + I * (c.nu() / l[a]));
    for b in (0..n).filter(|&b| b != a) {
        z *= re(1.0) + I * (2.0 * c.mu() / (l[a] - l[b]));
        z *= re(1.0) + I * (2.0 * c.mu() / (l[a] + l[b]));
    }
    Ok(z)
}

pub fn z_factors(lambda: &Chamber, c: &Couplings) -> Vec<Complex64> {
    (0..lambda.len())
        .map(|a| z_factor(a, lambda, c).expect("index in range"))
        .collect()
}

/// The pair `(alpha(x), beta(x))` entering `h`; `beta` is purely imaginary.
pub fn alpha_beta(x: f64, kappa: f64) -> Result<(f64, Complex64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("alpha/beta need x > 0, got {x}")));
    }
    let s = (x + x.hypot(kappa)).sqrt();
    let r = (2.0 * x).sqrt();
    Ok((s / r, Complex64::new(0.0, kappa / (r * s))))
}

/// The matrix `h(lambda) = [[diag alpha, diag beta], [-diag beta, diag alpha]]`.
pub fn build_h(lambda: &Chamber, c: &Couplings) -> ComplexMatrix {
    let n = lambda.len();
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        let (al, be) = alpha_beta(lambda[a], c.kappa()).expect("chamber entries are positive");
        h[(a, a)] = re(al);
        h[(n + a, n + a)] = re(al);
        h[(a, n + a)] = be;
        h[(n + a, a)] = -be;
    }
    h
}

/// `h^{-1} = C h C`, exact because `alpha^2 + beta^2 = 1`.
pub fn build_h_inv(lambda: &Chamber, c: &Couplings) -> ComplexMatrix {
    let n = lambda.len();
    let cm = build_c(n);
    &cm * build_h(lambda, c) * &cm
}

/// Closed form `h^{-2} = sqrt(1 + kappa^2 Lambda^{-2}) + i kappa C Lambda^{-1}`.
pub fn h_inv_sq_closed(lambda: &Chamber, c: &Couplings) -> ComplexMatrix {
    let n = lambda.len();
    let k = c.kappa();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        let l = lambda[a];
        let d = (1.0 + k * k / (l * l)).sqrt();
        m[(a, a)] = re(d);
        m[(n + a, n + a)] = re(d);
        // (C Lambda^{-1})_{a, n+a} = -1/l and (C Lambda^{-1})_{n+a, a} = 1/l
        m[(a, n + a)] = I * (-k / l);
        m[(n + a, a)] = I * (k / l);
    }
    m
}

fn half_log1p_ratio(k_sq: f64, x: f64) -> f64 {
    0.5 * (k_sq / (x * x)).ln_1p()
}

/// Asymptotic phase `Delta_a(lambda)` for every particle.
pub fn delta_phase(lambda: &Chamber, c: &Couplings) -> Vec<f64> {
    let l = lambda.as_slice();
    let n = l.len();
    let four_mu_sq = 4.0 * c.mu() * c.mu();
    (0..n)
        .map(|a| {
            let mut d = 0.0;
            for b in 0..n {
                if b == a {
                    continue;
                }
                let diff = half_log1p_ratio(four_mu_sq, l[a] - l[b]);
                d += if b < a { -diff } else { diff };
                d += half_log1p_ratio(four_mu_sq, l[a] + l[b]);
            }
            d + half_log1p_ratio(c.nu() * c.nu(), l[a]) + half_log1p_ratio(c.kappa() * c.kappa(), l[a])
        })
        .collect()
}
