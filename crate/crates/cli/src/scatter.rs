//! `scatter`: fitted asymptotes against the wave maps, the phase-shift decomposition and the
//! decay verdicts for one trajectory.

use bcn_core::dynamics::{solve_rsvd, solve_sutherland, Method, TimeGrid};
use bcn_core::scattering::{
    delta_phase, extrapolate_rsvd_limits, fit_linear_asymptote, phase_shift_terms, rsvd_horizon, scattering_map_r, RSVD_LIMIT_DEGREE,
    scattering_map_s, sutherland_horizon, verify_decay_rates_r, verify_decay_rates_s, wave_map_r, wave_map_s,
    DecayOptions, DecayReport,
};
use bcn_core::duality::{dualize_r_to_s, dualize_s_to_r};
use bcn_core::{AsymptoticState, Couplings, PhasePointR, PhasePointS, Sign};
use serde::Serialize;

use crate::config::{InitialPoint, ModelKind, RunConfig};
use crate::error::CliError;
use crate::output::timestamp;
use crate::simulate::CouplingsJson;

/// Fits must agree with the wave maps to this.
pub const FIT_TOL: f64 = 1e-6;
/// The scattering map applied to the incoming data must reproduce the outgoing data to this.
pub const MAP_TOL: f64 = 1e-8;
/// Largest `|t|` a fit window may reach before the horizon counts as unreachable.
pub const MAX_FIT_TIME: f64 = 1e4;
const SAMPLES: usize = 48;

#[derive(Debug, Clone, Serialize)]
pub struct StateJson {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl From<&AsymptoticState> for StateJson {
    fn from(s: &AsymptoticState) -> Self {
        StateJson { x: s.x.clone(), y: s.y.clone() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SideFit {
    pub side: String,
    pub window: [f64; 2],
    pub fitted: StateJson,
    pub theory: StateJson,
    /// `|fitted - theory|`, componentwise.
    pub deviation: StateJson,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseShiftTable {
    /// Wall contribution to each particle's shift.
    pub one_body: Vec<f64>,
    /// Row `a`: contribution of each other particle to the shift of particle `a`.
    pub two_body: Vec<Vec<f64>>,
    /// One-body plus two-body.
    pub total: Vec<f64>,
    /// Shift function evaluated directly.
    pub direct: Vec<f64>,
    /// `x^+ + x^-` from the trajectory fits.
    pub fitted: Vec<f64>,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MapCheck {
    pub incoming: StateJson,
    pub outgoing: StateJson,
    /// The scattering map applied to `incoming`.
    pub predicted: StateJson,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecaySide {
    pub side: String,
    pub horizon: f64,
    pub monotone_or_stable: bool,
    pub rate: Option<f64>,
    pub intercept_error: f64,
    pub slope_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayJson {
    pub sides: Vec<DecaySide>,
    pub passed: bool,
}

impl From<&DecayReport> for DecayJson {
    fn from(r: &DecayReport) -> Self {
        DecayJson {
            sides: r
                .sides
                .iter()
                .map(|s| DecaySide {
                    side: side_name(s.side).into(),
                    horizon: s.horizon,
                    monotone_or_stable: s.monotone,
                    rate: s.rate.is_finite().then_some(s.rate),
                    intercept_error: s.intercept_error,
                    slope_error: s.slope_error,
                    passed: s.passed,
                })
                .collect(),
            passed: r.passed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScatterReport {
    pub model: ModelKind,
    pub n: usize,
    pub couplings: CouplingsJson,
    pub horizon: f64,
    pub fit_tol: f64,
    pub map_tol: f64,
    pub sides: Vec<SideFit>,
    /// Sutherland only.
    pub phase_shift: Option<PhaseShiftTable>,
    pub scattering_map: MapCheck,
    pub decay: DecayJson,
    pub verdict: String,
    pub generated_at: Option<u64>,
}

fn side_name(s: Sign) -> &'static str {
    match s {
        Sign::Plus => "+",
        Sign::Minus => "-",
    }
}

fn window(side: Sign, t0: f64, t1: f64) -> Result<TimeGrid, CliError> {
    let s = side.as_f64();
    let mut pts: Vec<f64> = (0..SAMPLES).map(|k| s * (t0 + (t1 - t0) * k as f64 / (SAMPLES - 1) as f64)).collect();
    pts.sort_by(f64::total_cmp);
    Ok(TimeGrid::new(pts)?)
}

fn absdiff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect()
}

fn vmax(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn side_fit(side: Sign, win: [f64; 2], fitted: StateJson, theory: &AsymptoticState) -> SideFit {
    let deviation = StateJson { x: absdiff(&fitted.x, &theory.x), y: absdiff(&fitted.y, &theory.y) };
    let max_deviation = vmax(&deviation.x).max(vmax(&deviation.y));
    SideFit { side: side_name(side).into(), window: win, fitted, theory: theory.into(), deviation, max_deviation }
}

fn map_check(incoming: &AsymptoticState, outgoing: &AsymptoticState, predicted: &AsymptoticState) -> MapCheck {
    let dev = vmax(&absdiff(&predicted.to_vec(), &outgoing.to_vec()));
    MapCheck { incoming: incoming.into(), outgoing: outgoing.into(), predicted: predicted.into(), max_deviation: dev }
}

fn reachable(horizon: f64) -> Result<(), CliError> {
    if !(4.0 * horizon <= MAX_FIT_TIME) {
        return Err(CliError::Numeric(format!(
            "fit horizon unreachable: the window [T, 4T] with T = {horizon:.3e} exceeds |t| = {MAX_FIT_TIME:e}"
        )));
    }
    Ok(())
}

fn scatter_s(pt: &PhasePointS, c: &Couplings) -> Result<(f64, Vec<SideFit>, Option<PhaseShiftTable>, MapCheck, DecayReport), CliError> {
    let dual = dualize_s_to_r(pt, c)?.point;
    let t_h = sutherland_horizon(&dual.lambda);
    reachable(t_h)?;
    let mut sides = Vec::new();
    let mut theory = Vec::new();
    let mut fitted_x = Vec::new();
    for side in [Sign::Minus, Sign::Plus] {
        let exact = wave_map_s(pt, c, side)?;
        let tr = solve_sutherland(pt, &window(side, t_h, 4.0 * t_h)?, c, Method::Duality)?;
        let fit = fit_linear_asymptote(&tr, side, t_h)?;
        fitted_x.push(fit.intercept.clone());
        sides.push(side_fit(side, [t_h, 4.0 * t_h], StateJson { x: fit.intercept, y: fit.slope }, &exact));
        theory.push(exact);
    }
    let terms = phase_shift_terms(&dual.lambda, c);
    let total = terms.total();
    let fitted: Vec<f64> = fitted_x[0].iter().zip(&fitted_x[1]).map(|(a, b)| a + b).collect();
    let table = PhaseShiftTable {
        one_body: terms.one_body.clone(),
        two_body: (0..dual.n()).map(|a| terms.two_body.row(a).iter().copied().collect()).collect(),
        max_deviation: vmax(&absdiff(&fitted, &total)),
        direct: delta_phase(&dual.lambda, c),
        total,
        fitted,
    };
    let map = map_check(&theory[0], &theory[1], &scattering_map_s(&theory[0], c)?);
    let decay = verify_decay_rates_s(pt, c, &DecayOptions::default())?;
    Ok((t_h, sides, Some(table), map, decay))
}

fn scatter_r(pt: &PhasePointR, c: &Couplings) -> Result<(f64, Vec<SideFit>, Option<PhaseShiftTable>, MapCheck, DecayReport), CliError> {
    let dual = dualize_r_to_s(pt, c)?.point;
    let t_h = rsvd_horizon(&dual.q);
    reachable(t_h)?;
    let mut sides = Vec::new();
    let mut theory = Vec::new();
    for side in [Sign::Minus, Sign::Plus] {
        let exact = wave_map_r(pt, c, side)?;
        let tr = solve_rsvd(pt, &window(side, t_h, 4.0 * t_h)?, c, Method::Duality)?;
        let (x, y) = extrapolate_rsvd_limits(&tr, side, t_h, RSVD_LIMIT_DEGREE)?;
        sides.push(side_fit(side, [t_h, 4.0 * t_h], StateJson { x, y }, &exact));
        theory.push(exact);
    }
    let map = map_check(&theory[0], &theory[1], &scattering_map_r(&theory[0])?);
    let decay = verify_decay_rates_r(pt, c, &DecayOptions::default())?;
    Ok((t_h, sides, None, map, decay))
}

pub fn scatter(cfg: &RunConfig, timestamps: bool) -> Result<ScatterReport, CliError> {
    let c = cfg.couplings()?;
    let point = cfg.initial_point()?;
    let (n, (horizon, sides, phase_shift, scattering_map, decay)) = match &point {
        InitialPoint::Sutherland(pt) => (pt.n(), scatter_s(pt, &c)?),
        InitialPoint::Rsvd(pt) => (pt.n(), scatter_r(pt, &c)?),
    };
    let pass = sides.iter().all(|s| s.max_deviation <= FIT_TOL)
        && phase_shift.as_ref().is_none_or(|p| p.max_deviation <= FIT_TOL)
        && scattering_map.max_deviation <= MAP_TOL
        && decay.passed;
    Ok(ScatterReport {
        model: cfg.model,
        n,
        couplings: (&c).into(),
        horizon,
        fit_tol: FIT_TOL,
        map_tol: MAP_TOL,
        sides,
        phase_shift,
        scattering_map,
        decay: (&decay).into(),
        verdict: if pass { "pass" } else { "fail" }.into(),
        generated_at: timestamp(timestamps),
    })
}
