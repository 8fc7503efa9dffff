//! Trajectories of both models: algebraic solutions through the duality map, and plain
//! numerical integration of Hamilton's equations as an independent check.

pub mod ode;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::builders::{build_c, build_h, build_h_inv, diag_pm};
use crate::duality::{action_variables, dualize_r_to_s, dualize_s_to_r, dualize_s_to_r_with, DualityOptions};
use crate::error::{Error, Result};
use crate::laxops::{acal_matrix, build_acal, build_lax_r, build_lax_s, hamiltonian_r, hamiltonian_s, v_factors};
use crate::matengine::bigfloat::{with_precision, BigFloat};
use crate::matengine::dense::{self, Cx, Mat};
use crate::matengine::{eig_general_real_spectrum, PrecisionConfig};
use crate::types::{Chamber, Couplings, PhasePointR, PhasePointS, CHAMBER_MARGIN};

pub use ode::{OdeOptions, OdeStats};

/// Strictly increasing, finite sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidInput("time grid is empty".into()));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("time grid has non-finite entries".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("time grid must be strictly increasing".into()));
        }
        Ok(TimeGrid { times })
    }

    /// `count` equally spaced points from `t0` to `t1` inclusive.
    pub fn uniform(t0: f64, t1: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Self::new(vec![t0]);
        }
        let dt = (t1 - t0) / (count - 1) as f64;
        Self::new((0..count).map(|k| if k + 1 == count { t1 } else { t0 + dt * k as f64 }).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the sample closest to `t = 0`.
    pub fn nearest_zero(&self) -> usize {
        let mut best = 0;
        for (k, t) in self.times.iter().enumerate() {
            if t.abs() < self.times[best].abs() {
                best = k;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Duality,
    Ode,
}

/// How the RSvD duality solver visits the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Continuation {
    /// Sequential outward sweep from `t = 0`, each Newton polish started from the
    /// extrapolated neighbour.
    #[default]
    Warm,
    /// Every grid point from its own asymptotic seed; independent, so run concurrently.
    ColdParallel,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepDiagnostics {
    pub energy: f64,
    pub newton_iters: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory<P> {
    pub grid: TimeGrid,
    pub states: Vec<P>,
    pub method: Method,
    pub diagnostics: Vec<StepDiagnostics>,
    /// `max_t |H(t) - H(t_ref)|` relative to `max(1, |H(t_ref)|)`, `t_ref` the sample nearest 0.
    pub energy_drift: f64,
    pub ode_stats: Option<OdeStats>,
}

impl<P> Trajectory<P> {
    fn assemble(grid: TimeGrid, states: Vec<P>, method: Method, diagnostics: Vec<StepDiagnostics>) -> Self {
        let h0 = diagnostics[grid.nearest_zero()].energy;
        let energy_drift =
            diagnostics.iter().map(|d| (d.energy - h0).abs()).fold(0.0, f64::max) / h0.abs().max(1.0);
        Trajectory { grid, states, method, diagnostics, energy_drift, ode_stats: None }
    }
}

fn map_points<T, F>(items: &[f64], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(|&t| f(t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(|&t| f(t)).collect()
    }
}

fn in_chamber(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] - w[1] > CHAMBER_MARGIN) && x.last().is_some_and(|&v| v > CHAMBER_MARGIN)
}

fn inv_sinh_sq_prime(x: f64) -> f64 {
    let s = x.sinh();
    -2.0 * x.cosh() / (s * s * s)
}

/// Hamilton's equations of the Sutherland model: `(dq, dp) = (p, -dH/dq)`.
pub fn ode_rhs_s(pt: &PhasePointS, c: &Couplings) -> (Vec<f64>, Vec<f64>) {
    let q = pt.q.as_slice();
    let n = q.len();
    let dp = (0..n)
        .map(|a| {
            let mut g = c.g1_sq() * inv_sinh_sq_prime(q[a]) + 2.0 * c.g2_sq() * inv_sinh_sq_prime(2.0 * q[a]);
            for b in (0..n).filter(|&b| b != a) {
                g += c.g_sq() * (inv_sinh_sq_prime(q[a] - q[b]) + inv_sinh_sq_prime(q[a] + q[b]));
            }
            -g
        })
        .collect();
    (pt.p.clone(), dp)
}

/// Hamilton's equations of the RSvD model: `(dlambda, dtheta) = (dH/dtheta, -dH/dlambda)`.
pub fn ode_rhs_r(pt: &PhasePointR, c: &Couplings) -> (Vec<f64>, Vec<f64>) {
    let l = pt.lambda.as_slice();
    let n = l.len();
    let v = v_factors(&pt.lambda, c);
    let m = 4.0 * c.mu() * c.mu();
    let (nu2, ka2) = (c.nu() * c.nu(), c.kappa() * c.kappa());
    // d/du of ln sqrt(1 + s/u^2)
    let dlog = |u: f64, s: f64| -s / (u * (u * u + s));
    let dlambda: Vec<f64> = (0..n).map(|a| 2.0 * (2.0 * pt.theta[a]).sinh() * v[a]).collect();
    let mut grad = vec![0.0; n];
    for a in 0..n {
        let w = (2.0 * pt.theta[a]).cosh() * v[a];
        let x = l[a];
        grad[a] += w * (dlog(x, nu2) + dlog(x, ka2));
        for b in (0..n).filter(|&b| b != a) {
            let dm = dlog(x - l[b], m);
            let dp = dlog(x + l[b], m);
            grad[a] += w * (dm + dp);
            grad[b] += w * (-dm + dp);
        }
    }
    let prod: f64 = l.iter().map(|x| 1.0 + m / (x * x)).product();
    let pref = c.nu() * c.kappa() / m * prod;
    for (b, g) in grad.iter_mut().enumerate() {
        *g += pref * 2.0 * dlog(l[b], m);
    }
    (dlambda, grad.into_iter().map(|g| -g).collect())
}

/// Splits the grid around `t = 0` into a backward part (descending) and a forward part.
fn split_grid(times: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let back = times.iter().rev().copied().filter(|&t| t < 0.0).collect();
    let fwd = times.iter().copied().filter(|&t| t >= 0.0).collect();
    (back, fwd)
}

fn integrate_both_ways<F>(
    rhs: F,
    valid: fn(&[f64]) -> bool,
    y0: &[f64],
    grid: &TimeGrid,
    opts: &OdeOptions,
) -> Result<(Vec<Vec<f64>>, OdeStats)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let (back, fwd) = split_grid(grid.as_slice());
    let (mut ys_back, s1) = ode::integrate(|_, y| rhs(y), valid, 0.0, y0, &back, opts)?;
    let (ys_fwd, s2) = ode::integrate(|_, y| rhs(y), valid, 0.0, y0, &fwd, opts)?;
    ys_back.reverse();
    ys_back.extend(ys_fwd);
    let stats = OdeStats {
        accepted: s1.accepted + s2.accepted,
        rejected: s1.rejected + s2.rejected,
        evaluations: s1.evaluations + s2.evaluations,
    };
    Ok((ys_back, stats))
}

/// Sutherland trajectory through `pt0` at `t = 0`.
pub fn solve_sutherland(pt0: &PhasePointS, grid: &TimeGrid, c: &Couplings, method: Method) -> Result<Trajectory<PhasePointS>> {
    solve_sutherland_with(pt0, grid, c, method, &OdeOptions::default())
}

pub fn solve_sutherland_with(
    pt0: &PhasePointS,
    grid: &TimeGrid,
    c: &Couplings,
    method: Method,
    ode_opts: &OdeOptions,
) -> Result<Trajectory<PhasePointS>> {
    let n = pt0.n();
    match method {
        Method::Duality => {
            let dual = dualize_s_to_r(pt0, c)?;
            let (lambda, theta) = (dual.point.lambda, dual.point.theta);
            let newton = dual.diagnostics.newton_iters;
            let out = map_points(grid.as_slice(), |t| {
                if t == 0.0 {
                    return Ok((pt0.clone(), newton, dual.diagnostics.roundtrip_residual));
                }
                let shifted: Vec<f64> = (0..n).map(|a| theta[a] - t * lambda[a]).collect();
                let back = dualize_r_to_s(&PhasePointR { lambda: lambda.clone(), theta: shifted }, c)?;
                Ok((back.point, 0, back.diagnostics.inversion_residual))
            })?;
            let mut states = Vec::with_capacity(out.len());
            let mut diags = Vec::with_capacity(out.len());
            for (p, it, r) in out {
                diags.push(StepDiagnostics { energy: hamiltonian_s(&p, c), newton_iters: it, residual: r });
                states.push(p);
            }
            Ok(Trajectory::assemble(grid.clone(), states, method, diags))
        }
        Method::Ode => {
            let rhs = |y: &[f64]| -> Result<Vec<f64>> {
                let (dq, dp) = ode_rhs_s(&PhasePointS::from_slice(y)?, c);
                Ok([dq, dp].concat())
            };
            let valid: fn(&[f64]) -> bool = |y| in_chamber(&y[..y.len() / 2]);
            let (ys, stats) = integrate_both_ways(rhs, valid, &pt0.to_vec(), grid, ode_opts)?;
            let states = ys.iter().map(|y| PhasePointS::from_slice(y)).collect::<Result<Vec<_>>>()?;
            let diags = states
                .iter()
                .map(|p| StepDiagnostics { energy: hamiltonian_s(p, c), ..Default::default() })
                .collect();
            let mut tr = Trajectory::assemble(grid.clone(), states, method, diags);
            tr.ode_stats = Some(stats);
            Ok(tr)
        }
    }
}

/// RSvD trajectory through `pt0` at `t = 0`.
pub fn solve_rsvd(pt0: &PhasePointR, grid: &TimeGrid, c: &Couplings, method: Method) -> Result<Trajectory<PhasePointR>> {
    solve_rsvd_with(pt0, grid, c, method, Continuation::Warm, &OdeOptions::default())
}

pub fn solve_rsvd_with(
    pt0: &PhasePointR,
    grid: &TimeGrid,
    c: &Couplings,
    method: Method,
    continuation: Continuation,
    ode_opts: &OdeOptions,
) -> Result<Trajectory<PhasePointR>> {
    match method {
        Method::Duality => {
            let dual = dualize_r_to_s(pt0, c)?.point;
            let at = |t: f64| PhasePointS {
                q: dual.q.clone(),
                p: dual.p.iter().zip(dual.q.as_slice()).map(|(p, q)| p - 2.0 * t * (2.0 * q).sinh()).collect(),
            };
            let times = grid.as_slice();
            let mut out: Vec<Option<(PhasePointR, usize, f64)>> = vec![None; times.len()];
            match continuation {
                Continuation::ColdParallel => {
                    let v = map_points(times, |t| {
                        if t == 0.0 {
                            return Ok((pt0.clone(), 0, 0.0));
                        }
                        let r = dualize_s_to_r(&at(t), c)?;
                        Ok((r.point, r.diagnostics.newton_iters, r.diagnostics.roundtrip_residual))
                    })?;
                    out = v.into_iter().map(Some).collect();
                }
                Continuation::Warm => {
                    let k0 = grid.nearest_zero();
                    let sweep = |idx: &mut dyn Iterator<Item = usize>, out: &mut Vec<Option<(PhasePointR, usize, f64)>>| -> Result<()> {
                        // history of (t, theta) for linear extrapolation
                        let mut hist: Vec<(f64, Vec<f64>)> = Vec::new();
                        for k in idx {
                            let t = times[k];
                            let res = if t == 0.0 {
                                (pt0.clone(), 0, 0.0)
                            } else {
                                let guess = match hist.len() {
                                    0 => None,
                                    1 => Some(hist[0].1.clone()),
                                    _ => {
                                        let (t1, th1) = &hist[hist.len() - 1];
                                        let (t2, th2) = &hist[hist.len() - 2];
                                        let w = (t - t1) / (t1 - t2);
                                        Some(th1.iter().zip(th2).map(|(a, b)| a + w * (a - b)).collect())
                                    }
                                };
                                let opts = DualityOptions { warm_start: guess, ..Default::default() };
                                let r = dualize_s_to_r_with(&at(t), c, &opts)?;
                                (r.point, r.diagnostics.newton_iters, r.diagnostics.roundtrip_residual)
                            };
                            hist.push((t, res.0.theta.clone()));
                            out[k] = Some(res);
                        }
                        Ok(())
                    };
                    sweep(&mut (k0..times.len()), &mut out)?;
                    sweep(&mut (0..k0).rev(), &mut out)?;
                }
            }
            let mut states = Vec::with_capacity(times.len());
            let mut diags = Vec::with_capacity(times.len());
            for (p, it, r) in out.into_iter().map(|o| o.expect("every grid point visited")) {
                diags.push(StepDiagnostics { energy: hamiltonian_r(&p, c), newton_iters: it, residual: r });
                states.push(p);
            }
            Ok(Trajectory::assemble(grid.clone(), states, method, diags))
        }
        Method::Ode => {
            let rhs = |y: &[f64]| -> Result<Vec<f64>> {
                let (dl, dt) = ode_rhs_r(&PhasePointR::from_slice(y)?, c);
                Ok([dl, dt].concat())
            };
            let valid: fn(&[f64]) -> bool = |y| in_chamber(&y[..y.len() / 2]);
            let (ys, stats) = integrate_both_ways(rhs, valid, &pt0.to_vec(), grid, ode_opts)?;
            let states = ys.iter().map(|y| PhasePointR::from_slice(y)).collect::<Result<Vec<_>>>()?;
            let diags = states
                .iter()
                .map(|p| StepDiagnostics { energy: hamiltonian_r(p, c), ..Default::default() })
                .collect();
            let mut tr = Trajectory::assemble(grid.clone(), states, method, diags);
            tr.ode_stats = Some(stats);
            Ok(tr)
        }
    }
}

/// `lambda(t)` of the RSvD flow only, read off as the positive spectrum of
/// `L(q, p - 2t sinh 2q)` without reconstructing the angles.
pub fn solve_rsvd_lambda(pt0: &PhasePointR, grid: &TimeGrid, c: &Couplings) -> Result<Vec<Chamber>> {
    let dual = dualize_r_to_s(pt0, c)?.point;
    let prec = PrecisionConfig::default();
    map_points(grid.as_slice(), |t| {
        if t == 0.0 {
            return Ok(pt0.lambda.clone());
        }
        let p = dual.p.iter().zip(dual.q.as_slice()).map(|(p, q)| p - 2.0 * t * (2.0 * q).sinh()).collect();
        let pt = PhasePointS { q: dual.q.clone(), p };
        Ok(action_variables(&pt, c, &prec)?.0)
    })
}

/// Quantities conserved along a trajectory, one row per time.
pub trait ConservedActions {
    fn conserved_actions(&self, c: &Couplings) -> Result<DMatrix<f64>>;
}

impl ConservedActions for Trajectory<PhasePointS> {
    /// `lambda(t)`, the positive spectrum of the Lax matrix.
    fn conserved_actions(&self, c: &Couplings) -> Result<DMatrix<f64>> {
        let prec = PrecisionConfig::default();
        let rows = map_points(&(0..self.states.len()).map(|k| k as f64).collect::<Vec<_>>(), |k| {
            Ok(action_variables(&self.states[k as usize], c, &prec)?.0.into_vec())
        })?;
        Ok(rows_to_matrix(rows))
    }
}

impl ConservedActions for Trajectory<PhasePointR> {
    /// The dual positions `q(t)`.
    fn conserved_actions(&self, c: &Couplings) -> Result<DMatrix<f64>> {
        let rows = map_points(&(0..self.states.len()).map(|k| k as f64).collect::<Vec<_>>(), |k| {
            Ok(dualize_r_to_s(&self.states[k as usize], c)?.point.q.into_vec())
        })?;
        Ok(rows_to_matrix(rows))
    }
}

pub fn conserved_actions<T: ConservedActions>(traj: &T, c: &Couplings) -> Result<DMatrix<f64>> {
    traj.conserved_actions(c)
}

fn rows_to_matrix(rows: Vec<Vec<f64>>) -> DMatrix<f64> {
    let n = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j])
}

/// Spectrum of `A sqrt(1 + kappa^2 Lambda^-2) e^{2 t Lambda} + i kappa A C Lambda^-1` built from
/// the action-angle data at `t = 0`: it equals the spectrum of `e^{2 Q(t)}` along the Sutherland
/// flow. Returned as `ln` of the eigenvalues, halved, descending.
pub fn sutherland_flow_spectrum(dual: &PhasePointR, c: &Couplings, t: f64) -> Result<Vec<f64>> {
    let n = dual.n();
    let l = dual.lambda.as_slice();
    let k = c.kappa();
    let acal = build_acal(dual, c);
    let lam = diag_pm(l);
    let root = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i != j {
            return Complex64::new(0.0, 0.0);
        }
        let x = l[i % n];
        let s = if i < n { 1.0 } else { -1.0 };
        Complex64::new((1.0 + k * k / (x * x)).sqrt() * (2.0 * t * s * x).exp(), 0.0)
    });
    let lam_inv = lam.clone().try_inverse().ok_or_else(|| Error::Domain("Lambda is singular".into()))?;
    let m = &acal * root + &acal * build_c(n) * lam_inv * Complex64::new(0.0, k);
    let eig = eig_general_real_spectrum(&m, &PrecisionConfig::default(), false)?;
    Ok(eig.values.iter().map(|v| 0.5 * v.ln()).collect())
}

/// [`sutherland_flow_spectrum`] with the matrix assembled and reduced at `bits` of precision.
/// The double-precision version loses the lower half of the spectrum once `|q|` is a few units;
/// this one resolves all `2n` eigenvalues to full relative accuracy.
pub fn sutherland_flow_spectrum_extended(dual: &PhasePointR, c: &Couplings, t: f64, bits: u32) -> Result<Vec<f64>> {
    let n = dual.n();
    let mut out = with_precision(bits, || -> Result<Vec<f64>> {
        let f = BigFloat::from_f64;
        let zero = || f(0.0);
        let acal = acal_matrix::<BigFloat>(dual, c);
        let k = f(c.kappa());
        let mut rhs = Mat::<BigFloat>::zeros(2 * n);
        for a in 0..n {
            let x = f(dual.lambda[a]);
            let root = (f(1.0) + k.clone() * k.clone() / (x.clone() * x.clone())).sqrt();
            let e = (f(2.0 * t) * x.clone()).exp();
            rhs.set(a, a, Cx::new(root.clone() * e.clone(), zero()));
            rhs.set(n + a, n + a, Cx::new(root / e, zero()));
            let off = k.clone() / x;
            rhs.set(a, n + a, Cx::new(zero(), -off.clone()));
            rhs.set(n + a, a, Cx::new(zero(), off));
        }
        let (tri, _) = dense::schur(&acal.mul(&rhs))?;
        (0..2 * n)
            .map(|i| {
                let v = tri.get(i, i).clone();
                if v.re.is_negative() || num_traits::Zero::is_zero(&v.re) {
                    return Err(Error::Domain(format!("flow matrix eigenvalue {:e} is not positive", v.re.to_f64())));
                }
                Ok(0.5 * v.re.ln_to_f64())
            })
            .collect()
    })?;
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// Spectrum of `h Lambda h^-1 - t (A^BC - (A^BC)^-1)` at the initial RSvD point: it equals
/// `(lambda(t), -lambda(t))` along the RSvD flow. Descending.
pub fn rsvd_flow_spectrum(pt0: &PhasePointR, c: &Couplings, t: f64) -> Result<Vec<f64>> {
    let abc = build_lax_r(pt0, c)?.abc;
    let abc_inv = abc.clone().try_inverse().ok_or_else(|| Error::Domain("A^BC is singular".into()))?;
    let hlh = build_h(&pt0.lambda, c) * diag_pm(pt0.lambda.as_slice()) * build_h_inv(&pt0.lambda, c);
    let m = hlh - (abc - abc_inv) * Complex64::new(t, 0.0);
    Ok(eig_general_real_spectrum(&m, &PrecisionConfig::default(), true)?.values)
}

/// Lax spectrum of a Sutherland state, exposed for the conserved-quantity checks.
pub fn sutherland_lax_spectrum(pt: &PhasePointS, c: &Couplings) -> Result<Vec<f64>> {
    let l = build_lax_s(pt, c).l;
    Ok(eig_general_real_spectrum(&l, &PrecisionConfig::default(), true)?.values)
}
