//! Domain types shared by both particle systems.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix. Lax matrices and their relatives are `2n x 2n`.
pub type ComplexMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type ComplexVector = DVector<Complex64>;

/// Default absolute margin on consecutive gaps and on the last coordinate of a chamber point.
pub const CHAMBER_MARGIN: f64 = 1e-9;

/// The RSvD coupling triple `(mu, nu, kappa)` with `nu > 0 > mu`, `kappa >= 0`.
///
/// The Sutherland constants are derived from it and never set independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    mu: f64,
    nu: f64,
    kappa: f64,
}

impl Couplings {
    pub fn new(mu: f64, nu: f64, kappa: f64) -> Result<Self> {
        if !mu.is_finite() || mu >= 0.0 {
            return Err(Error::InvalidParameter {
                name: "mu",
                reason: format!("must be finite and negative, got {mu}"),
            });
        }
        if !nu.is_finite() || nu <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "nu",
                reason: format!("must be finite and positive, got {nu}"),
            });
        }
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: format!("must be finite and non-negative, got {kappa}"),
            });
        }
        let c = Couplings { mu, nu, kappa };
        debug_assert!(c.g_sq() > 0.0 && c.g1_sq() + c.g2_sq() > 0.0);
        Ok(c)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Pair coupling `g^2 = mu^2`.
    pub fn g_sq(&self) -> f64 {
        self.mu * self.mu
    }

    /// External-field coupling `g1^2 = nu kappa / 2`.
    pub fn g1_sq(&self) -> f64 {
        0.5 * self.nu * self.kappa
    }

    /// External-field coupling `g2^2 = (nu - kappa)^2 / 2`.
    pub fn g2_sq(&self) -> f64 {
        0.5 * (self.nu - self.kappa).powi(2)
    }
}

/// Same as [`Couplings::new`]; named after the parameterization it takes.
pub fn couplings_from_rsvd(mu: f64, nu: f64, kappa: f64) -> Result<Couplings> {
    Couplings::new(mu, nu, kappa)
}

/// Returns whether `x` lies in the open chamber `x_1 > ... > x_n > 0` with margin
/// [`CHAMBER_MARGIN`].
pub fn validate_chamber(x: &[f64]) -> Result<bool> {
    validate_chamber_with_margin(x, CHAMBER_MARGIN)
}

pub fn validate_chamber_with_margin(x: &[f64], margin: f64) -> Result<bool> {
    if x.is_empty() {
        return Err(Error::InvalidInput("chamber point must have at least one entry".into()));
    }
    Ok(chamber_violation(x, margin).is_none())
}

fn chamber_violation(x: &[f64], margin: f64) -> Option<String> {
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Some(format!("entry {} is not finite", i + 1));
    }
    for (i, w) in x.windows(2).enumerate() {
        if w[0] - w[1] <= margin {
            return Some(format!(
                "entries {} and {} are not strictly decreasing ({} <= {} + margin)",
                i + 1,
                i + 2,
                w[0],
                w[1]
            ));
        }
    }
    let last = x[x.len() - 1];
    if last <= margin {
        return Some(format!("last entry {last} is not positive"));
    }
    None
}

/// A point of the open Weyl chamber `x_1 > x_2 > ... > x_n > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chamber(Vec<f64>);

impl Chamber {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        Self::with_margin(x, CHAMBER_MARGIN)
    }

    pub fn with_margin(x: Vec<f64>, margin: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidInput("chamber point must have at least one entry".into()));
        }
        match chamber_violation(&x, margin) {
            Some(msg) => Err(Error::Chamber(msg)),
            None => Ok(Chamber(x)),
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Smallest of the consecutive gaps and the last coordinate.
    pub fn min_gap(&self) -> f64 {
        let last = self.0[self.0.len() - 1];
        self.0.windows(2).map(|w| w[0] - w[1]).fold(last, f64::min)
    }
}

impl std::ops::Index<usize> for Chamber {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// A point `(q, p)` of the Sutherland phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePointS {
    pub q: Chamber,
    pub p: Vec<f64>,
}

impl PhasePointS {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        check_len(q.len(), p.len())?;
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("momenta must be finite".into()));
        }
        Ok(PhasePointS { q: Chamber::new(q)?, p })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    /// Canonical coordinates `(q_1..q_n, p_1..p_n)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.q.as_slice().to_vec();
        v.extend_from_slice(&self.p);
        v
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        if x.len() % 2 != 0 || x.is_empty() {
            return Err(Error::InvalidInput(format!("expected 2n coordinates, got {}", x.len())));
        }
        let n = x.len() / 2;
        Self::new(x[..n].to_vec(), x[n..].to_vec())
    }
}

/// A point `(lambda, theta)` of the RSvD phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePointR {
    pub lambda: Chamber,
    pub theta: Vec<f64>,
}

impl PhasePointR {
    pub fn new(lambda: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        check_len(lambda.len(), theta.len())?;
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("theta must be finite".into()));
        }
        Ok(PhasePointR { lambda: Chamber::new(lambda)?, theta })
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// Canonical coordinates `(lambda_1..lambda_n, theta_1..theta_n)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.lambda.as_slice().to_vec();
        v.extend_from_slice(&self.theta);
        v
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        if x.len() % 2 != 0 || x.is_empty() {
            return Err(Error::InvalidInput(format!("expected 2n coordinates, got {}", x.len())));
        }
        let n = x.len() / 2;
        Self::new(x[..n].to_vec(), x[n..].to_vec())
    }
}

/// Time direction of an asymptotic regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Free asymptotic data `(x, y)`: phases `x` and momenta `y`.
///
/// For `Sign::Plus` the momenta satisfy `y_1 > ... > y_n > 0`, for `Sign::Minus`
/// `y_1 < ... < y_n < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sign: Sign,
}

impl AsymptoticState {
    pub fn new(x: Vec<f64>, y: Vec<f64>, sign: Sign) -> Result<Self> {
        check_len(x.len(), y.len())?;
        if x.is_empty() {
            return Err(Error::InvalidInput("asymptotic state must be non-empty".into()));
        }
        let state = AsymptoticState { x, y, sign };
        state.check_ordering()?;
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// `sign * y`, which must lie in the chamber.
    pub fn unsigned_momenta(&self) -> Vec<f64> {
        let s = self.sign.as_f64();
        self.y.iter().map(|v| s * v).collect()
    }

    pub fn check_ordering(&self) -> Result<()> {
        let m = self.unsigned_momenta();
        match chamber_violation(&m, 0.0) {
            None => Ok(()),
            Some(msg) => Err(Error::Ordering(format!("momenta for sign {:?}: {msg}", self.sign))),
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.y);
        v
    }
}

fn frob(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius norm.
pub fn norm(m: &ComplexMatrix) -> f64 {
    frob(m)
}

/// `||M - M^*|| <= tol * max(1, ||M||)`.
pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && frob(&(m - m.adjoint())) <= tol * frob(m).max(1.0)
}

/// `||M + M^*|| <= tol * max(1, ||M||)`.
pub fn is_anti_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && frob(&(m + m.adjoint())) <= tol * frob(m).max(1.0)
}

/// Membership in `U(n, n)`: `y^* C y = C`, relative to `||y||^2`.
pub fn in_group(y: &ComplexMatrix, tol: f64) -> bool {
    group_residual(y) <= tol * frob(y).powi(2).max(1.0)
}

/// Membership in `u(n, n)`: `Y^* C + C Y = 0`.
pub fn in_algebra(y: &ComplexMatrix, tol: f64) -> bool {
    algebra_residual(y) <= tol * frob(y).max(1.0)
}

/// `||y^* C y - C||`.
pub fn group_residual(y: &ComplexMatrix) -> f64 {
    let n = y.nrows() / 2;
    let c = crate::builders::build_c(n);
    frob(&(y.adjoint() * &c * y - c))
}

/// `||Y^* C + C Y||`.
pub fn algebra_residual(y: &ComplexMatrix) -> f64 {
    let n = y.nrows() / 2;
    let c = crate::builders::build_c(n);
    frob(&(y.adjoint() * &c + &c * y))
}
