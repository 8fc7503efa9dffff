//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits nonzero if any fails.
//!
//! Run alone with `cargo test -p bcn-cli --test acceptance`.

use std::process::{Command, ExitCode};
use std::time::Instant;

use bcn_core::duality::{dualize_r_to_s, dualize_s_to_r, s_inv_map, s_map, symplecticity_certificate};
use bcn_core::dynamics::{solve_rsvd, solve_sutherland, Method, TimeGrid};
use bcn_core::laxops::{
    cauchy_minor_check, energy_from_lax_r, energy_from_lax_s, hamiltonian_r, hamiltonian_s, momentum_residual_r,
    momentum_residual_s,
};
use bcn_core::sampling::Sampler;
use bcn_core::scattering::{
    fit_linear_asymptote, inverse_wave_map_r, inverse_wave_map_s, phase_shift_terms, scattering_map_r,
    scattering_map_s, sutherland_horizon, verify_decay_rates_r, verify_decay_rates_s, wave_map_r, wave_map_s,
    DecayOptions,
};
use bcn_core::{AsymptoticState, Couplings, PhasePointR, PhasePointS, Sign};

/// Largest `|t|` any criterion may integrate to.
const T_MAX: f64 = 40.0;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Worst value over fallible samples; an error anywhere becomes `Err` with its message.
fn worst(values: impl IntoIterator<Item = Result<f64, String>>) -> Result<f64, String> {
    values.into_iter().try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn within(name: &str, v: &Result<f64, String>, tol: f64) -> (bool, String) {
    match v {
        Ok(x) => (*x <= tol, format!("{name} {x:.2e} (tol {tol:.0e})")),
        Err(e) => (false, format!("{name} error: {e}")),
    }
}

fn join(parts: Vec<(bool, String)>) -> Verdict {
    let passed = parts.iter().all(|p| p.0);
    verdict(passed, parts.into_iter().map(|p| p.1).collect::<Vec<_>>().join("; "))
}

const PULLBACK_SIZES: [usize; 5] = [1, 2, 3, 4, 6];

struct LaxSample {
    c: Couplings,
    s: PhasePointS,
    r: PhasePointR,
}

fn lax_samples() -> Vec<LaxSample> {
    let mut rng = Sampler::new(101);
    PULLBACK_SIZES
        .iter()
        .flat_map(|&n| (0..100).map(move |_| n))
        .map(|n| LaxSample { c: rng.couplings(), s: rng.point_s(n), r: rng.point_r(n) })
        .collect()
}

fn energy_pullbacks(samples: &[LaxSample]) -> Verdict {
    let t0 = Instant::now();
    let es = worst(samples.iter().map(|x| Ok(rel(energy_from_lax_s(&x.s, &x.c), hamiltonian_s(&x.s, &x.c)))));
    let er = worst(samples.iter().map(|x| Ok(rel(energy_from_lax_r(&x.r, &x.c), hamiltonian_r(&x.r, &x.c)))));
    let secs = t0.elapsed().as_secs_f64();
    join(vec![
        within("Sutherland", &es, 1e-10),
        within("RSvD", &er, 1e-10),
        (secs < 5.0, format!("{} points in {secs:.2} s (limit 5 s)", samples.len())),
    ])
}

fn momentum_residuals(samples: &[LaxSample]) -> Verdict {
    let ms = worst(samples.iter().map(|x| momentum_residual_s(&x.s, &x.c).map_err(err)));
    let mr = worst(samples.iter().map(|x| momentum_residual_r(&x.r, &x.c).map_err(err)));
    join(vec![within("Sutherland", &ms, 1e-9), within("RSvD", &mr, 1e-9)])
}

fn minor_identities() -> Verdict {
    let mut rng = Sampler::new(103);
    let mut det = Vec::new();
    let mut log = Vec::new();
    for n in 1..=6 {
        for _ in 0..20 {
            let c = rng.couplings();
            let pt = rng.point_r(n);
            let r = cauchy_minor_check(&pt, &c).map_err(err);
            det.push(r.as_ref().map(|r| r.cauchy_rel_errors.iter().copied().fold(0.0, f64::max)).map_err(Clone::clone));
            log.push(r.map(|r| r.log_residuals.iter().map(|x| x.abs()).fold(0.0, f64::max)));
        }
    }
    join(vec![within("determinant", &worst(det), 1e-10), within("log minor", &worst(log), 1e-10)])
}

fn roundtrips() -> Verdict {
    let mut rng = Sampler::new(104);
    let mut fwd = Vec::new();
    let mut inv = Vec::new();
    let (mut total, mut fast) = (0usize, 0usize);
    for n in 1..=6 {
        for _ in 0..50 {
            let c = rng.couplings();
            let ps = rng.point_s(n);
            let pr = rng.point_r(n);
            total += 1;
            fwd.push(dualize_s_to_r(&ps, &c).map_err(err).and_then(|f| {
                fast += usize::from(f.diagnostics.newton_iters <= 10);
                let back = dualize_r_to_s(&f.point, &c).map_err(err)?.point;
                Ok(sup_dist(&back.to_vec(), &ps.to_vec()))
            }));
            inv.push(dualize_r_to_s(&pr, &c).map_err(err).and_then(|b| {
                let back = dualize_s_to_r(&b.point, &c).map_err(err)?.point;
                Ok(sup_dist(&back.to_vec(), &pr.to_vec()))
            }));
        }
    }
    let share = fast as f64 / total as f64;
    join(vec![
        within("S^-1 after S", &worst(fwd), 1e-8),
        within("S after S^-1", &worst(inv), 1e-8),
        (share >= 0.95, format!("Newton <= 10 iterations in {:.1}% (need 95%)", 100.0 * share)),
    ])
}

fn symplecticity() -> Verdict {
    let mut rng = Sampler::new(105);
    let (mut fwd, mut inv, mut ss, mut sr) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for k in 0..20 {
        let n = 1 + k % 3;
        let c = rng.couplings();
        let ps = rng.point_s(n);
        let pr = rng.point_r(n);
        fwd.push(symplecticity_certificate(s_map(&c), &ps.to_vec(), None).map_err(err));
        inv.push(symplecticity_certificate(s_inv_map(&c), &pr.to_vec(), None).map_err(err));
        let incoming = incoming_state(&mut rng, n).to_vec();
        let map_s = |v: &[f64]| -> bcn_core::Result<Vec<f64>> {
            let x = AsymptoticState::new(v[..n].to_vec(), v[n..].to_vec(), Sign::Minus)?;
            Ok(scattering_map_s(&x, &c)?.to_vec())
        };
        let map_r = |v: &[f64]| -> bcn_core::Result<Vec<f64>> {
            let x = AsymptoticState::new(v[..n].to_vec(), v[n..].to_vec(), Sign::Minus)?;
            Ok(scattering_map_r(&x)?.to_vec())
        };
        ss.push(symplecticity_certificate(map_s, &incoming, None).map_err(err));
        sr.push(symplecticity_certificate(map_r, &incoming, None).map_err(err));
    }
    join(vec![
        within("S", &worst(fwd), 1e-5),
        within("S^-1", &worst(inv), 1e-5),
        within("S^S", &worst(ss), 1e-5),
        within("S^R", &worst(sr), 1e-5),
    ])
}

fn incoming_state(rng: &mut Sampler, n: usize) -> AsymptoticState {
    let y = rng.chamber(n, 0.4, 0.4, 1.0).into_iter().map(|v| -v).collect();
    let x = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
    AsymptoticState::new(x, y, Sign::Minus).expect("sampled state is valid")
}

fn solver_agreement() -> Verdict {
    let mut rng = Sampler::new(106);
    let grid = TimeGrid::uniform(-5.0, 5.0, 41).expect("valid grid");
    let (mut ds, mut dr, mut drift) = (Vec::new(), Vec::new(), Vec::new());
    for n in 1..=3 {
        for _ in 0..3 {
            let c = rng.couplings();
            let ps = rng.point_s(n);
            let pr = rng.point_r(n);
            let s = (|| {
                let a = solve_sutherland(&ps, &grid, &c, Method::Duality).map_err(err)?;
                let b = solve_sutherland(&ps, &grid, &c, Method::Ode).map_err(err)?;
                let d = a.states.iter().zip(&b.states).map(|(x, y)| sup_dist(&x.to_vec(), &y.to_vec())).fold(0.0, f64::max);
                Ok((d, b.energy_drift))
            })();
            let r = (|| {
                let a = solve_rsvd(&pr, &grid, &c, Method::Duality).map_err(err)?;
                let b = solve_rsvd(&pr, &grid, &c, Method::Ode).map_err(err)?;
                let d = a.states.iter().zip(&b.states).map(|(x, y)| sup_dist(&x.to_vec(), &y.to_vec())).fold(0.0, f64::max);
                Ok((d, b.energy_drift))
            })();
            drift.push(s.clone().map(|v| v.1));
            drift.push(r.clone().map(|v| v.1));
            ds.push(s.map(|v| v.0));
            dr.push(r.map(|v| v.0));
        }
    }
    join(vec![
        within("Sutherland", &worst(ds), 1e-6),
        within("RSvD", &worst(dr), 1e-6),
        within("ODE energy drift", &worst(drift), 1e-8),
    ])
}

/// Sutherland point whose actions have gaps of at least 1, keeping the decay windows inside `|t| <= 32`.
fn separated_point_s(rng: &mut Sampler, n: usize, c: &Couplings) -> Result<PhasePointS, String> {
    let lambda = rng.chamber(n, 1.0, 1.0, 1.0);
    let theta = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
    Ok(dualize_r_to_s(&PhasePointR::new(lambda, theta).map_err(err)?, c).map_err(err)?.point)
}

fn sutherland_decay() -> Verdict {
    let mut rng = Sampler::new(107);
    let opts = DecayOptions::default();
    let mut parts = Vec::new();
    let (mut worst_fit, mut min_rate, mut all_monotone, mut reach) = (0.0f64, f64::INFINITY, true, 0.0f64);
    for n in 1..=3 {
        for _ in 0..2 {
            let c = rng.couplings();
            let rep = separated_point_s(&mut rng, n, &c).and_then(|pt| verify_decay_rates_s(&pt, &c, &opts).map_err(err));
            match rep {
                Ok(rep) => {
                    for side in &rep.sides {
                        worst_fit = worst_fit.max(side.intercept_error).max(side.slope_error);
                        min_rate = min_rate.min(if side.rate.is_nan() { 0.0 } else { side.rate });
                        all_monotone &= side.monotone;
                        reach = reach.max(4.0 * side.horizon);
                    }
                    if rep.sides.len() != 2 {
                        parts.push((false, format!("n={n}: expected both sides, got {}", rep.sides.len())));
                    }
                }
                Err(e) => parts.push((false, format!("n={n}: {e}"))),
            }
        }
    }
    parts.push((all_monotone, format!("monotone on both sides: {all_monotone}")));
    parts.push((min_rate > 0.0, format!("smallest fitted rate {min_rate:.3}")));
    parts.push((worst_fit <= 1e-6, format!("intercept/slope error {worst_fit:.2e} (tol 1e-6)")));
    parts.push((reach <= T_MAX, format!("windows reach |t| = {reach:.1}")));
    join(parts)
}

/// RSvD point with dual positions bounded away from the wall and from each other.
fn separated_point_r(rng: &mut Sampler, n: usize, c: &Couplings) -> Result<PhasePointR, String> {
    let q = rng.chamber(n, 1.0, 1.5, 0.5);
    let p = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
    Ok(dualize_s_to_r(&PhasePointS::new(q, p).map_err(err)?, c).map_err(err)?.point)
}

fn rsvd_decay() -> Verdict {
    let mut rng = Sampler::new(108);
    // windows [T, 4T] and [2T, 8T] stay inside |t| <= 40
    let horizon = T_MAX / 8.0;
    let opts = DecayOptions { horizon: Some(horizon), ..DecayOptions::default() };
    let mut parts = Vec::new();
    let mut worst_ratio = 1.0f64;
    for n in 1..=3 {
        for _ in 0..2 {
            let c = rng.couplings();
            match separated_point_r(&mut rng, n, &c).and_then(|pt| verify_decay_rates_r(&pt, &c, &opts).map_err(err)) {
                Ok(rep) => {
                    for side in &rep.sides {
                        // (lambda, theta) then (v - 1, unused) for each of the two windows
                        let (w1, v1, w2, v2) = (side.scaled_sups[0], side.scaled_sups[1], side.scaled_sups[2], side.scaled_sups[3]);
                        for (a, b) in [(w1.0, w2.0), (w1.1, w2.1), (v1.0, v2.0)] {
                            if a.max(b) > 1e-12 {
                                worst_ratio = worst_ratio.max(a.max(b) / a.min(b));
                            }
                        }
                    }
                    if !rep.passed {
                        parts.push((false, format!("n={n}: scaled sups not stable")));
                    }
                }
                Err(e) => parts.push((false, format!("n={n}: {e}"))),
            }
        }
    }
    parts.push((worst_ratio <= 2.0, format!("worst T -> 2T ratio of scaled sups {worst_ratio:.3} (limit 2)")));
    join(parts)
}

fn scattering() -> Verdict {
    let mut rng = Sampler::new(109);
    let (mut comp_s, mut comp_r) = (Vec::new(), Vec::new());
    for n in 1..=3 {
        for _ in 0..4 {
            let c = rng.couplings();
            let st = incoming_state(&mut rng, n);
            comp_s.push((|| {
                let pt = inverse_wave_map_s(&st, &c).map_err(err)?;
                let out = wave_map_s(&pt, &c, Sign::Plus).map_err(err)?;
                Ok(sup_dist(&out.to_vec(), &scattering_map_s(&st, &c).map_err(err)?.to_vec()))
            })());
            comp_r.push((|| {
                let pt = inverse_wave_map_r(&st, &c).map_err(err)?;
                let out = wave_map_r(&pt, &c, Sign::Plus).map_err(err)?;
                Ok(sup_dist(&out.to_vec(), &scattering_map_r(&st).map_err(err)?.to_vec()))
            })());
        }
    }
    let mut shifts = Vec::new();
    for n in 1..=3 {
        for _ in 0..2 {
            let c = rng.couplings();
            shifts.push(separated_point_s(&mut rng, n, &c).and_then(|pt| fitted_shift_error(&pt, &c)));
        }
    }
    join(vec![
        within("W+ W-^-1 vs S^S", &worst(comp_s), 1e-8),
        within("W+ W-^-1 vs S^R", &worst(comp_r), 1e-8),
        within("fitted vs factorized shift", &worst(shifts), 1e-6),
    ])
}

/// `x^+ + x^-` from linear fits on both sides against the sum of one- and two-body shifts.
fn fitted_shift_error(pt: &PhasePointS, c: &Couplings) -> Result<f64, String> {
    let dual = dualize_s_to_r(pt, c).map_err(err)?.point;
    let t_h = sutherland_horizon(&dual.lambda);
    let mut sum = vec![0.0; pt.n()];
    for side in [Sign::Minus, Sign::Plus] {
        let sg = side.as_f64();
        let mut ts: Vec<f64> = (0..40).map(|k| sg * (t_h + 3.0 * t_h * k as f64 / 39.0)).collect();
        ts.sort_by(f64::total_cmp);
        let tr = solve_sutherland(pt, &TimeGrid::new(ts).map_err(err)?, c, Method::Duality).map_err(err)?;
        let fit = fit_linear_asymptote(&tr, side, t_h).map_err(err)?;
        for (s, x) in sum.iter_mut().zip(&fit.intercept) {
            *s += x;
        }
    }
    Ok(sup_dist(&sum, &phase_shift_terms(&dual.lambda, c).total()))
}

fn verify_all() -> Verdict {
    let t0 = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_bcn")).args(["verify", "--suite", "all"]).output();
    let secs = t0.elapsed().as_secs_f64();
    match out {
        Ok(o) => {
            let code = o.status.code();
            let ok = code == Some(0) && secs <= 60.0;
            let mut detail = format!("exit {code:?} in {secs:.1} s (limit 60 s)");
            if code != Some(0) {
                detail.push_str(&format!("; {}", String::from_utf8_lossy(&o.stderr).lines().last().unwrap_or("")));
            }
            verdict(ok, detail)
        }
        Err(e) => verdict(false, format!("could not run bcn: {e}")),
    }
}

fn main() -> ExitCode {
    let samples = lax_samples();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        ("energy pullbacks", Box::new(|| energy_pullbacks(&samples))),
        ("momentum-map zero level", Box::new(|| momentum_residuals(&samples))),
        ("Cauchy and minor identities", Box::new(minor_identities)),
        ("duality roundtrips", Box::new(roundtrips)),
        ("symplecticity", Box::new(symplecticity)),
        ("duality vs ODE trajectories", Box::new(solver_agreement)),
        ("Sutherland exponential approach", Box::new(sutherland_decay)),
        ("RSvD algebraic approach", Box::new(rsvd_decay)),
        ("wave and scattering maps", Box::new(scattering)),
        ("verify --suite all", Box::new(verify_all)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        failed += usize::from(!v.passed);
        println!("{} [{:>2}] {name}: {}", if v.passed { "PASS" } else { "FAIL" }, k + 1, v.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
