//! Dormand–Prince 5(4) with step-size control and cubic Hermite output onto a grid.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Largest allowed step; `f64::INFINITY` disables the bound.
    pub h_max: f64,
    /// Shorten steps so that every target is a step endpoint. Otherwise targets inside a
    /// step are filled in by cubic Hermite interpolation.
    pub land_on_targets: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, max_steps: 1_000_000, h_max: f64::INFINITY, land_on_targets: true }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the state at each of `targets`.
///
/// `targets` must run monotonically away from `t0`, all on one side of it. `valid` is
/// checked after every accepted step; a `false` aborts with the last good time.
pub fn integrate<F, G>(
    mut f: F,
    valid: G,
    t0: f64,
    y0: &[f64],
    targets: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<Vec<f64>>, OdeStats)>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
    G: Fn(&[f64]) -> bool,
{
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(targets.len());
    let Some(&t_end) = targets.last() else {
        return Ok((out, stats));
    };
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    if targets.windows(2).any(|w| (w[1] - w[0]) * dir < 0.0) || (targets[0] - t0) * dir < 0.0 {
        return Err(Error::InvalidInput("targets must run monotonically away from t0".into()));
    }
    let dim = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = f(t, &y)?;
    stats.evaluations += 1;
    let mut next = 0;
    while next < targets.len() && targets[next] == t0 {
        out.push(y.clone());
        next += 1;
    }
    if next == targets.len() {
        return Ok((out, stats));
    }

    let err_norm = |e: &[f64], a: &[f64], b: &[f64]| -> f64 {
        let s: f64 = (0..dim)
            .map(|i| {
                let sc = opts.atol + opts.rtol * a[i].abs().max(b[i].abs());
                (e[i] / sc).powi(2)
            })
            .sum();
        (s / dim.max(1) as f64).sqrt()
    };

    // initial step from the usual two-point estimate
    let mut h = {
        let zero = vec![0.0; dim];
        let d0 = err_norm(&y, &y, &zero);
        let d1 = err_norm(&k1, &y, &zero);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1: Vec<f64> = (0..dim).map(|i| y[i] + dir * h0 * k1[i]).collect();
        let k = f(t + dir * h0, &y1)?;
        stats.evaluations += 1;
        let diff: Vec<f64> = (0..dim).map(|i| k[i] - k1[i]).collect();
        let d2 = err_norm(&diff, &y, &zero) / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1).min(opts.h_max)
    };
    let mut err_prev: f64 = 1e-4;
    let mut steps = 0;
    while next < targets.len() {
        if steps >= opts.max_steps {
            return Err(Error::Integration { t, reason: "step budget exhausted".into() });
        }
        steps += 1;
        let remaining = if opts.land_on_targets { (targets[next] - t) * dir } else { (t_end - t) * dir };
        let hh = h.min(remaining).min(opts.h_max);
        if hh <= f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::Integration { t, reason: "step size underflow".into() });
        }
        let hs = dir * hh;
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        k.push(k1.clone());
        let mut ok = true;
        for s in 1..7 {
            let ys: Vec<f64> = (0..dim)
                .map(|i| y[i] + hs * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>())
                .collect();
            match f(t + C[s] * hs, &ys) {
                Ok(v) if v.iter().all(|x| x.is_finite()) => k.push(v),
                _ => {
                    ok = false;
                    break;
                }
            }
            stats.evaluations += 1;
        }
        if !ok {
            stats.rejected += 1;
            h = hh * 0.25;
            continue;
        }
        let y_new: Vec<f64> = (0..dim)
            .map(|i| y[i] + hs * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>())
            .collect();
        let e: Vec<f64> = (0..dim).map(|i| hs * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>()).collect();
        let err = err_norm(&e, &y, &y_new);
        if !err.is_finite() || err > 1.0 {
            stats.rejected += 1;
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.2 };
            h = hh * fac;
            continue;
        }
        if !valid(&y_new) {
            return Err(Error::Integration { t, reason: "left the admissible region".into() });
        }
        stats.accepted += 1;
        let t_new = if hh == remaining && opts.land_on_targets { targets[next] } else { t + hs };
        let k_new = k.pop().expect("seven stages");
        while next < targets.len() && (targets[next] - t_new) * dir <= 0.0 {
            out.push(hermite(t, &y, &k1, t_new, &y_new, &k_new, targets[next]));
            next += 1;
        }
        // PI step-size controller
        let err_c = err.max(1e-10);
        let fac = 0.9 * err_c.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
        // a step cut short to land on a target says little about the natural step
        h = if hh < h { h.max(hh * fac.clamp(0.2, 5.0)) } else { hh * fac.clamp(0.2, 5.0) };
        err_prev = err_c;
        t = t_new;
        y = y_new;
        k1 = k_new;
    }
    Ok((out, stats))
}

fn hermite(t0: f64, y0: &[f64], f0: &[f64], t1: f64, y1: &[f64], f1: &[f64], t: f64) -> Vec<f64> {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    (0..y0.len())
        .map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
        .collect()
}
