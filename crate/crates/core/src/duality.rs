//! The action-angle duality map between the Sutherland and RSvD phase spaces.
//!
//! `dualize_r_to_s` reads `(q, p)` off the spectral decomposition of `A^BC`.
//! `dualize_s_to_r` takes `lambda` from the spectrum of `L` and recovers `theta`
//! from the large-time asymptotics of the Sutherland flow, then polishes it
//! against the inverse map.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::builders::{alpha_beta, build_c, delta_phase, diag_pm};
use crate::error::{Error, Result};
use crate::laxops::{acal_matrix, build_acal_base, build_lax_s};
use crate::matengine::bigfloat::{with_precision, BigFloat};
use crate::matengine::dense::{self, Cx, Mat, Real};
use crate::matengine::graded::{one_sided_jacobi, product_singular_values};
use crate::matengine::{eig_general_real_spectrum, finite_diff_jacobian, PrecisionConfig};
use crate::types::{Chamber, ComplexMatrix, Couplings, PhasePointR, PhasePointS};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DualityDiagnostics {
    /// Largest imaginary part met where a real quantity was expected.
    pub spectrum_imag_max: f64,
    /// Deviation of the spectrum of `A^BC` from closure under `x -> 1/x`, in log scale.
    pub inversion_residual: f64,
    pub newton_iters: usize,
    /// `|theta_seed - theta|_inf` for the forward map.
    pub seed_error: f64,
    /// Time at which the asymptotic seed was taken; infinite for the limit seed, zero for a warm start.
    pub seed_time: f64,
    /// `|S^-1(S(x)) - x|_inf` for the forward map.
    pub roundtrip_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityResult<P> {
    pub point: P,
    pub diagnostics: DualityDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityOptions {
    /// Target for the roundtrip residual, componentwise relative to `max(1, |x_i|)`.
    pub tol: f64,
    pub max_iters: usize,
    /// Seed time is chosen so that `t * min(gaps of lambda, lambda_n)` equals this.
    pub seed_gap_product: f64,
    /// Upper bound on `t * lambda_1` at the seed, keeping `e^{tL}` inside `f64`.
    pub max_exponent: f64,
    /// Start the polish from this `theta` instead of the asymptotic seed.
    pub warm_start: Option<Vec<f64>>,
    /// Recompute the seed at twice the time in extended precision and compare.
    pub verify_extended: bool,
    /// How many times a failed cold start is retried from an extended-precision seed,
    /// doubling the seed time each time.
    pub extended_escalations: u32,
    /// Working precision ceiling for those retries; bounds how far out the seed time can go.
    pub max_extended_bits: u32,
    pub prec: PrecisionConfig,
}

impl Default for DualityOptions {
    fn default() -> Self {
        DualityOptions {
            tol: 1e-10,
            max_iters: 25,
            seed_gap_product: 15.0,
            max_exponent: 300.0,
            warm_start: None,
            verify_extended: false,
            extended_escalations: 3,
            max_extended_bits: 4096,
            prec: PrecisionConfig::default(),
        }
    }
}

/// Closed-form SVD of the pair block `diag(e^-theta, e^theta) [[alpha, -beta], [beta, alpha]]`
/// (`beta = i b`), which has unit determinant.
/// Returns `(sigma_max, u, w)` with `u`, `w` unitary; singular values are `sigma_max` and its inverse.
fn pair_block_svd(theta: f64, alpha: f64, b: f64) -> (f64, [[Complex64; 2]; 2], [[Complex64; 2]; 2]) {
    let em = (-theta).exp();
    let ep = theta.exp();
    let m = [[Complex64::new(em * alpha, 0.0), Complex64::new(0.0, -em * b)], [Complex64::new(0.0, ep * b), Complex64::new(ep * alpha, 0.0)]];
    // M^*M / cosh(2 theta) = [[d1, -i r], [i r, d2]] with d1 - d2 = -2 tanh(2 theta); the scaling keeps
    // the squares finite for large |theta|
    let r = 2.0 * alpha * b;
    let diff = -2.0 * (2.0 * theta).tanh();
    let trace = (alpha * alpha + b * b) * 2.0;
    let big = 0.5 * trace + (0.25 * diff * diff + r * r).sqrt();
    let sqrt_c2 = theta.abs().exp() * (0.5 * (1.0 + (-4.0 * theta.abs()).exp())).sqrt();
    let sigma = big.sqrt() * sqrt_c2;
    let phi = 0.5 * (2.0 * r).atan2(diff);
    let (cs, sn) = (phi.cos(), phi.sin());
    // phase of the off-diagonal entry is -i
    let ph = Complex64::new(0.0, -1.0);
    let w_max = [Complex64::new(cs, 0.0), ph.conj() * sn];
    let w_min = [-ph * sn, Complex64::new(cs, 0.0)];
    let u_max = [
        (m[0][0] * w_max[0] + m[0][1] * w_max[1]) / sigma,
        (m[1][0] * w_max[0] + m[1][1] * w_max[1]) / sigma,
    ];
    let u_min = [-u_max[1].conj(), u_max[0].conj()];
    (sigma, [[u_max[0], u_min[0]], [u_max[1], u_min[1]]], [[w_max[0], w_min[0]], [w_max[1], w_min[1]]])
}

/// Spectral data of `A^BC(lambda, theta)`: eigenvalues `e^{2 q}` (as `q`, descending over all
/// `2n`) and the matching unit eigenvectors, computed to high relative accuracy.
pub fn abc_spectrum(pt: &PhasePointR, c: &Couplings) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = pt.n();
    let big = 2 * n;
    let base = build_acal_base(&pt.lambda, c);
    let chol = Cholesky::new(base.clone()).ok_or_else(|| {
        let min = base.clone().symmetric_eigenvalues().min();
        Error::NotPositiveDefinite(min)
    })?;
    // A^BC = G0^* G0 with G0 = R E_theta h^-1 and R = L^*
    let r = chol.l().adjoint();
    let mut u_blk = DMatrix::<Complex64>::zeros(big, big);
    let mut w_blk = DMatrix::<Complex64>::zeros(big, big);
    let mut sig = vec![0.0; big];
    for a in 0..n {
        let (alpha, beta) = alpha_beta(pt.lambda[a], c.kappa())?;
        let (s, u, w) = pair_block_svd(pt.theta[a], alpha, beta.im);
        let idx = [a, n + a];
        for i in 0..2 {
            for j in 0..2 {
                u_blk[(idx[i], idx[j])] = u[i][j];
                w_blk[(idx[i], idx[j])] = w[i][j];
            }
        }
        sig[a] = s;
        sig[n + a] = 1.0 / s;
    }
    let mut g = r * u_blk;
    for (k, s) in sig.iter().enumerate() {
        g.column_mut(k).scale_mut(*s);
    }
    let mut j = DMatrix::identity(big, big);
    let sv = one_sided_jacobi(&mut g, Some(&mut j))?;
    let vectors_unsorted = w_blk * j;
    let mut order: Vec<usize> = (0..big).collect();
    order.sort_by(|&x, &y| sv[y].total_cmp(&sv[x]));
    let logs = order.iter().map(|&k| sv[k].ln()).collect();
    let vectors = DMatrix::from_fn(big, big, |i, k| vectors_unsorted[(i, order[k])]);
    Ok((logs, vectors))
}

/// `A^BC(lambda, theta)` assembled entrywise in the scalar type `T`.
fn abc_matrix<T: Real>(pt: &PhasePointR, c: &Couplings) -> Mat<T> {
    let n = pt.n();
    let f = T::from_f64;
    let cx = |re: T, im: T| Cx::new(re, im);
    let l: Vec<T> = pt.lambda.as_slice().iter().map(|&x| f(x)).collect();
    let k = f(c.kappa());
    let scaled = acal_matrix::<T>(pt, c);
    // h^-1 = C h C: diagonal alpha, (a, n + a) entry -beta, (n + a, a) entry beta
    let mut h_inv = Mat::<T>::zeros(2 * n);
    for a in 0..n {
        let x = l[a].clone();
        let hyp = (x.clone() * x.clone() + k.clone() * k.clone()).sqrt();
        let sq = (x.clone() + hyp).sqrt();
        let r = (f(2.0) * x).sqrt();
        let alpha = sq.clone() / r.clone();
        let beta = cx(f(0.0), k.clone() / (r * sq));
        h_inv.set(a, a, cx(alpha.clone(), f(0.0)));
        h_inv.set(n + a, n + a, cx(alpha, f(0.0)));
        h_inv.set(a, n + a, -beta.clone());
        h_inv.set(n + a, a, beta);
    }
    h_inv.mul(&scaled).mul(&h_inv)
}

/// Halved logs of the eigenvalues of `A^BC`, descending, with the matrix assembled and
/// diagonalized at `bits` of precision. Unlike [`abc_spectrum`] this also resolves the lower
/// half of the spectrum to full relative accuracy.
pub fn abc_spectrum_extended(pt: &PhasePointR, c: &Couplings, bits: u32) -> Result<Vec<f64>> {
    let mut logs = with_precision(bits, || -> Result<Vec<f64>> {
        let (vals, _) = dense::jacobi_hermitian(abc_matrix::<BigFloat>(pt, c))?;
        vals.iter()
            .map(|v| {
                if v.is_negative() || num_traits::Zero::is_zero(v) {
                    Err(Error::NotPositiveDefinite(v.to_f64()))
                } else {
                    Ok(0.5 * v.ln_to_f64())
                }
            })
            .collect()
    })?;
    logs.sort_by(|a, b| b.total_cmp(a));
    Ok(logs)
}

/// Relative tolerance on the `q <-> -q` symmetry of the spectrum of `A^BC`.
const INVERSION_TOL: f64 = 1e-6;

/// The inverse duality map `(lambda, theta) -> (q, p)`.
pub fn dualize_r_to_s(pt: &PhasePointR, c: &Couplings) -> Result<DualityResult<PhasePointS>> {
    let n = pt.n();
    let (logs, vectors) = abc_spectrum(pt, c)?;
    let inversion_residual = (0..n)
        .map(|k| (logs[k] + logs[2 * n - 1 - k]).abs() / logs[k].abs().max(1.0))
        .fold(0.0, f64::max);
    if !(inversion_residual <= INVERSION_TOL) {
        return Err(Error::SpectrumAsymmetric(inversion_residual));
    }
    // only the upper half is computed to high relative accuracy
    let q: Vec<f64> = logs[..n].to_vec();
    // p_a = u_a^* (h Lambda h^-1) u_a with h Lambda h^-1 = Lambda sqrt(1 + kappa^2 Lambda^-2) - i kappa C
    let k = c.kappa();
    let shifted: Vec<f64> = (0..2 * n)
        .map(|i| {
            let x = pt.lambda[i % n];
            let v = (x * x + k * k).sqrt();
            if i < n {
                v
            } else {
                -v
            }
        })
        .collect();
    let mut p = Vec::with_capacity(n);
    let mut imag_max: f64 = 0.0;
    for a in 0..n {
        let u = vectors.column(a);
        let diag_part: f64 = u.iter().zip(&shifted).map(|(z, s)| z.norm_sqr() * s).sum();
        // u^* C u is real
        let cu: Complex64 = (0..n).map(|i| u[i].conj() * u[n + i] + u[n + i].conj() * u[i]).sum();
        let imag = -k * cu.re;
        imag_max = imag_max.max(imag.abs());
        p.push(diag_part);
    }
    if imag_max > 1e-9 * pt.lambda[0].max(1.0) {
        return Err(Error::SpectrumNotReal(imag_max));
    }
    let point = PhasePointS::new(q, p)?;
    Ok(DualityResult {
        point,
        diagnostics: DualityDiagnostics { spectrum_imag_max: imag_max, inversion_residual, ..Default::default() },
    })
}

/// `lambda` = positive half of the spectrum of `L(q, p)`, descending.
pub fn action_variables(pt: &PhasePointS, c: &Couplings, prec: &PrecisionConfig) -> Result<(Chamber, f64)> {
    let l = build_lax_s(pt, c).l;
    let eig = eig_general_real_spectrum(&l, prec, true)?;
    let lambda = Chamber::new(eig.values[..pt.n()].to_vec())?;
    Ok((lambda, eig.imag_max))
}

fn seed_time(lambda: &Chamber, opts: &DualityOptions) -> f64 {
    (opts.seed_gap_product / lambda.min_gap()).min(opts.max_exponent / lambda[0])
}

/// Asymptotic estimate `theta_a = t lambda_a + Delta_a/2 - q_a(t)`, with `e^{q_a(t)}` the
/// leading singular values of `e^Q e^{tL}`.
pub fn seed_theta(pt: &PhasePointS, c: &Couplings, t: f64, prec: &PrecisionConfig) -> Result<(Chamber, Vec<f64>)> {
    let n = pt.n();
    let l = build_lax_s(pt, c).l;
    let eig = eig_general_real_spectrum(&l, prec, true)?;
    let lambda = Chamber::new(eig.values[..n].to_vec())?;
    let v = eig.vectors;
    let v_inv = v.clone().try_inverse().ok_or_else(|| Error::InvalidInput("Lax eigenvectors are singular".into()))?;
    let eq = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let v = if i != j { 0.0 } else if i < n { pt.q[i].exp() } else { (-pt.q[i - n]).exp() };
        Complex64::new(v, 0.0)
    });
    let d: Vec<f64> = eig.values.iter().map(|x| t * x).collect();
    let s = product_singular_values(&(eq * v), &d, &v_inv)?;
    let delta = delta_phase(&lambda, c);
    let theta = (0..n).map(|a| t * lambda[a] + 0.5 * delta[a] - s[a].ln()).collect();
    Ok((lambda, theta))
}

/// The `t -> infinity` limit of [`seed_theta`]. For `X e^{tD} Y` with `D` strictly decreasing, the
/// product of the leading `a` singular values tends to `e^{t (d_1 + .. + d_a)}` times the norms
/// of the `a`-th compounds of the leading columns of `X` and rows of `Y`, so
/// `theta_a = Delta_a/2 - ln|R^X_aa| - ln|R^Y_aa|` with `R` from unpivoted QR factorizations.
/// Free of the overflow that caps `t` in [`seed_theta`].
pub fn seed_theta_limit(pt: &PhasePointS, c: &Couplings, prec: &PrecisionConfig) -> Result<(Chamber, Vec<f64>)> {
    let n = pt.n();
    let l = build_lax_s(pt, c).l;
    let eig = eig_general_real_spectrum(&l, prec, true)?;
    let lambda = Chamber::new(eig.values[..n].to_vec())?;
    let v = eig.vectors;
    let v_inv = v.clone().try_inverse().ok_or_else(|| Error::InvalidInput("Lax eigenvectors are singular".into()))?;
    let x = DMatrix::from_fn(2 * n, n, |i, j| {
        let e = if i < n { pt.q[i].exp() } else { (-pt.q[i - n]).exp() };
        v[(i, j)] * e
    });
    let y = v_inv.rows(0, n).adjoint();
    let rx = x.qr().r();
    let ry = y.qr().r();
    let delta = delta_phase(&lambda, c);
    let theta = (0..n)
        .map(|a| {
            let (u, w) = (rx[(a, a)].norm(), ry[(a, a)].norm());
            if u > 0.0 && w > 0.0 {
                Ok(0.5 * delta[a] - u.ln() - w.ln())
            } else {
                Err(Error::InvalidInput("degenerate leading minor in the limit seed".into()))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((lambda, theta))
}

fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `S^-1(lambda, theta) - (q, p)`, each component relative to `max(1, |target_i|)`, or `None`
/// where the inverse map fails.
fn roundtrip_residual(lambda: &Chamber, theta: &[f64], target: &[f64], c: &Couplings) -> Option<Vec<f64>> {
    let pt = PhasePointR { lambda: lambda.clone(), theta: theta.to_vec() };
    let back = dualize_r_to_s(&pt, c).ok()?.point.to_vec();
    Some(back.iter().zip(target).map(|(a, b)| (a - b) / b.abs().max(1.0)).collect())
}

/// The duality map `(q, p) -> (lambda, theta)`.
pub fn dualize_s_to_r(pt: &PhasePointS, c: &Couplings) -> Result<DualityResult<PhasePointR>> {
    dualize_s_to_r_with(pt, c, &DualityOptions::default())
}

pub fn dualize_s_to_r_with(pt: &PhasePointS, c: &Couplings, opts: &DualityOptions) -> Result<DualityResult<PhasePointR>> {
    let n = pt.n();
    let (lambda, imag) = action_variables(pt, c, &opts.prec)?;
    let target = pt.to_vec();
    let tol = opts.tol;

    let attempt = |theta0: Vec<f64>| -> Result<(Vec<f64>, usize, f64)> {
        let mut theta = theta0;
        let mut res = roundtrip_residual(&lambda, &theta, &target, c)
            .ok_or_else(|| Error::NewtonFailed { iters: 0, residual: f64::INFINITY })?;
        let mut iters = 0;
        while sup_norm(&res) > tol {
            if iters >= opts.max_iters {
                return Err(Error::NewtonFailed { iters, residual: sup_norm(&res) });
            }
            iters += 1;
            let jac = finite_diff_jacobian(
                |th| roundtrip_residual(&lambda, th, &target, c).ok_or(Error::Domain("inverse map failed".into())),
                &theta,
                Some(1e-6),
            )?;
            let rhs = DVector::from_column_slice(&res);
            let svd = jac.svd(true, true);
            let step = svd.solve(&(-rhs), 1e-13).map_err(|e| Error::Domain(e.to_string()))?;
            let norm0 = sup_norm(&res);
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, d)| t + scale * d).collect();
                if let Some(r) = roundtrip_residual(&lambda, &trial, &target, c) {
                    if sup_norm(&r) < norm0 {
                        theta = trial;
                        res = r;
                        accepted = true;
                        break;
                    }
                }
                scale *= 0.5;
            }
            if !accepted {
                return Err(Error::NewtonFailed { iters, residual: norm0 });
            }
        }
        Ok((theta, iters, sup_norm(&res)))
    };

    let mut seed_t = 0.0;
    let (theta, iters, residual, seed_error) = match &opts.warm_start {
        Some(w) if w.len() == n => match attempt(w.clone()) {
            Ok((th, it, r)) => {
                let se = sup_norm(&th.iter().zip(w).map(|(a, b)| a - b).collect::<Vec<_>>());
                (th, it, r, se)
            }
            Err(_) => cold(pt, c, opts, &lambda, &attempt, &mut seed_t)?,
        },
        _ => cold(pt, c, opts, &lambda, &attempt, &mut seed_t)?,
    };

    let point = PhasePointR { lambda, theta };
    if opts.verify_extended {
        verify_theta_extended(pt, c, &point, None)?;
    }
    Ok(DualityResult {
        point,
        diagnostics: DualityDiagnostics {
            spectrum_imag_max: imag,
            inversion_residual: 0.0,
            newton_iters: iters,
            seed_error,
            seed_time: seed_t,
            roundtrip_residual: residual,
        },
    })
}

type Attempt<'a> = dyn Fn(Vec<f64>) -> Result<(Vec<f64>, usize, f64)> + 'a;

fn cold(
    pt: &PhasePointS,
    c: &Couplings,
    opts: &DualityOptions,
    lambda: &Chamber,
    attempt: &Attempt<'_>,
    seed_t: &mut f64,
) -> Result<(Vec<f64>, usize, f64, f64)> {
    let polish = |seed: Vec<f64>| -> Result<(Vec<f64>, usize, f64, f64)> {
        let (theta, iters, residual) = attempt(seed.clone())?;
        let seed_error = sup_norm(&theta.iter().zip(&seed).map(|(a, b)| a - b).collect::<Vec<_>>());
        if seed_error > 0.5 {
            return Err(Error::SeedError(seed_error));
        }
        Ok((theta, iters, residual, seed_error))
    };
    *seed_t = f64::INFINITY;
    let limit = seed_theta_limit(pt, c, &opts.prec).and_then(|(_, seed)| polish(seed));
    if limit.is_ok() {
        return limit;
    }
    let t = seed_time(lambda, opts);
    *seed_t = t;
    let first = seed_theta(pt, c, t, &opts.prec).and_then(|(_, seed)| polish(seed));
    if first.is_ok() || opts.extended_escalations == 0 {
        return first;
    }
    // the f64 cap on t cut the asymptotics short: go further out in extended precision
    let base = t.max(opts.seed_gap_product / lambda.min_gap());
    let t_cap = (f64::from(opts.max_extended_bits.saturating_sub(128)) * std::f64::consts::LN_2 - 4.0 * pt.q[0].abs())
        / (4.0 * lambda[0]);
    let mut last = first;
    let mut prev = t;
    for k in 1..=opts.extended_escalations {
        let te = (base * f64::from(1u32 << k)).min(t_cap);
        if te <= prev {
            break;
        }
        prev = te;
        *seed_t = te;
        last = seed_theta_extended(pt, c, lambda, te, None).and_then(&polish);
        if last.is_ok() {
            break;
        }
    }
    last
}

/// The asymptotic seed of [`seed_theta`] evaluated in extended precision, so that `t` is not
/// limited by the range of `f64`. With `bits = None` the working precision is sized from the
/// dynamic range of `e^{tL}`.
pub fn seed_theta_extended(pt: &PhasePointS, c: &Couplings, lambda: &Chamber, t: f64, bits: Option<u32>) -> Result<Vec<f64>> {
    let n = pt.n();
    let big = 2 * n;
    let range = 4.0 * t * lambda[0] + 4.0 * pt.q[0];
    let bits = bits.unwrap_or(128 + (range / std::f64::consts::LN_2).ceil() as u32);
    let l = build_lax_s(pt, c).l;
    let qs = pt.q.as_slice().to_vec();
    let logs: Vec<f64> = with_precision(bits, || -> Result<Vec<f64>> {
        let lm: Mat<BigFloat> = Mat::from_fn(big, |i, j| Cx::new(BigFloat::from_f64(l[(i, j)].re), BigFloat::from_f64(l[(i, j)].im)));
        let (tri, z) = dense::schur(&lm)?;
        let v = dense::schur_eigenvectors(&tri, &z);
        let v_inv = dense::inverse(&v)?;
        let tb = BigFloat::from_f64(t);
        let scale: Vec<BigFloat> = (0..big).map(|k| (&tb * &tri.get(k, k).re).exp()).collect();
        let eq: Vec<BigFloat> = (0..big)
            .map(|i| if i < n { BigFloat::from_f64(qs[i]).exp() } else { (-BigFloat::from_f64(qs[i - n])).exp() })
            .collect();
        // B = e^Q V e^{tD} V^-1
        let vd = Mat::from_fn(big, |i, j| {
            let s = &eq[i] * &scale[j];
            let z = v.get(i, j);
            Cx::new(&z.re * &s, &z.im * &s)
        });
        let b = vd.mul(&v_inv);
        let bb = b.mul(&b.adjoint());
        let (vals, _) = dense::jacobi_hermitian(bb)?;
        let mut vals = vals;
        vals.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
        Ok(vals[..n].iter().map(|x| 0.5 * x.ln_to_f64()).collect())
    })?;
    let delta = delta_phase(lambda, c);
    Ok((0..n).map(|a| t * lambda[a] + 0.5 * delta[a] - logs[a]).collect())
}

/// Recomputes the asymptotic seed at twice the default seed time with extended-precision
/// arithmetic throughout, and checks it against `dual.theta` to `1e-8`.
/// Returns the largest deviation.
pub fn verify_theta_extended(pt: &PhasePointS, c: &Couplings, dual: &PhasePointR, bits: Option<u32>) -> Result<f64> {
    let t = 2.0 * seed_time(&dual.lambda, &DualityOptions::default());
    let seed = seed_theta_extended(pt, c, &dual.lambda, t, bits)?;
    let dev = sup_norm(&seed.iter().zip(&dual.theta).map(|(a, b)| a - b).collect::<Vec<_>>());
    if dev > 1e-8 {
        return Err(Error::Verification(format!("extended-precision seed deviates from theta by {dev:e}")));
    }
    Ok(dev)
}

/// `|J^T Omega J - Omega|` (Frobenius) for the finite-difference Jacobian of `map` at `x`,
/// with `Omega = [[0, 1], [-1, 0]]` in the ordering `(x_1..x_n, y_1..y_n)`.
pub fn symplecticity_certificate<F>(map: F, x: &[f64], step: Option<f64>) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let m = x.len();
    if m % 2 != 0 {
        return Err(Error::InvalidInput("phase-space dimension must be even".into()));
    }
    let n = m / 2;
    let j = finite_diff_jacobian(map, x, step)?;
    if j.nrows() != m {
        return Err(Error::DimensionMismatch { expected: m, got: j.nrows() });
    }
    let omega = DMatrix::from_fn(m, m, |i, k| {
        if k == i + n {
            1.0
        } else if i == k + n {
            -1.0
        } else {
            0.0
        }
    });
    Ok((j.transpose() * &omega * &j - omega).norm())
}

/// `S` as a map on flat coordinates.
pub fn s_map(c: &Couplings) -> impl Fn(&[f64]) -> Result<Vec<f64>> + '_ {
    move |x| Ok(dualize_s_to_r(&PhasePointS::from_slice(x)?, c)?.point.to_vec())
}

/// `S^-1` as a map on flat coordinates.
pub fn s_inv_map(c: &Couplings) -> impl Fn(&[f64]) -> Result<Vec<f64>> + '_ {
    move |x| Ok(dualize_r_to_s(&PhasePointR::from_slice(x)?, c)?.point.to_vec())
}

/// `h Lambda h^-1` in closed form, `Lambda sqrt(1 + kappa^2 Lambda^-2) - i kappa C`.
pub fn dual_lax_closed(lambda: &Chamber, c: &Couplings) -> ComplexMatrix {
    let n = lambda.len();
    let k = c.kappa();
    let mut m = diag_pm(&lambda.as_slice().iter().map(|x| (x * x + k * k).sqrt()).collect::<Vec<_>>());
    m -= build_c(n) * (I * k);
    m
}
