//! Browser bindings for a few `bcn-core` operations.
//!
//! Each export has a plain Rust counterpart returning `Result<Vec<f64>, String>` so the logic
//! runs under `cargo test` on the host; the `#[wasm_bindgen]` wrappers only convert the error.
//! Points travel as flat arrays: positions first, then momenta.

use bcn_core::duality::{dualize_r_to_s, dualize_s_to_r};
use bcn_core::dynamics::{solve_sutherland, Method, TimeGrid};
use bcn_core::scattering::phase_shift_terms;
use bcn_core::{Chamber, Couplings, PhasePointR, PhasePointS};
use wasm_bindgen::prelude::*;

fn couplings(mu: f64, nu: f64, kappa: f64) -> Result<Couplings, String> {
    Couplings::new(mu, nu, kappa).map_err(|e| e.to_string())
}

fn split(coords: &[f64]) -> Result<(Vec<f64>, Vec<f64>), String> {
    if coords.is_empty() || coords.len() % 2 != 0 {
        return Err(format!("expected 2n coordinates, got {}", coords.len()));
    }
    let n = coords.len() / 2;
    Ok((coords[..n].to_vec(), coords[n..].to_vec()))
}

/// Sutherland `(q, p)` to RSvD `(lambda, theta)`.
pub fn dualize_forward(mu: f64, nu: f64, kappa: f64, coords: &[f64]) -> Result<Vec<f64>, String> {
    let c = couplings(mu, nu, kappa)?;
    let (q, p) = split(coords)?;
    let pt = PhasePointS::new(q, p).map_err(|e| e.to_string())?;
    Ok(dualize_s_to_r(&pt, &c).map_err(|e| e.to_string())?.point.to_vec())
}

/// RSvD `(lambda, theta)` to Sutherland `(q, p)`.
pub fn dualize_backward(mu: f64, nu: f64, kappa: f64, coords: &[f64]) -> Result<Vec<f64>, String> {
    let c = couplings(mu, nu, kappa)?;
    let (lambda, theta) = split(coords)?;
    let pt = PhasePointR::new(lambda, theta).map_err(|e| e.to_string())?;
    Ok(dualize_r_to_s(&pt, &c).map_err(|e| e.to_string())?.point.to_vec())
}

/// Sutherland trajectory on `steps` uniform times, flattened row by row as `t, q.., p..`.
pub fn trajectory(mu: f64, nu: f64, kappa: f64, coords: &[f64], tmin: f64, tmax: f64, steps: usize) -> Result<Vec<f64>, String> {
    let c = couplings(mu, nu, kappa)?;
    let (q, p) = split(coords)?;
    let pt = PhasePointS::new(q, p).map_err(|e| e.to_string())?;
    let grid = TimeGrid::uniform(tmin, tmax, steps.max(2)).map_err(|e| e.to_string())?;
    let tr = solve_sutherland(&pt, &grid, &c, Method::Duality).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(tr.states.len() * (1 + coords.len()));
    for (t, s) in grid.as_slice().iter().zip(&tr.states) {
        out.push(*t);
        out.extend(s.to_vec());
    }
    Ok(out)
}

/// Total asymptotic phase shift for each particle, given the asymptotic momenta.
pub fn phase_shifts(mu: f64, nu: f64, kappa: f64, momenta: &[f64]) -> Result<Vec<f64>, String> {
    let c = couplings(mu, nu, kappa)?;
    let lambda = Chamber::new(momenta.to_vec()).map_err(|e| e.to_string())?;
    Ok(phase_shift_terms(&lambda, &c).total())
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = dualizeForward)]
pub fn dualize_forward_js(mu: f64, nu: f64, kappa: f64, coords: &[f64]) -> Result<Vec<f64>, JsValue> {
    js(dualize_forward(mu, nu, kappa, coords))
}

#[wasm_bindgen(js_name = dualizeBackward)]
pub fn dualize_backward_js(mu: f64, nu: f64, kappa: f64, coords: &[f64]) -> Result<Vec<f64>, JsValue> {
    js(dualize_backward(mu, nu, kappa, coords))
}

#[wasm_bindgen(js_name = trajectory)]
pub fn trajectory_js(mu: f64, nu: f64, kappa: f64, coords: &[f64], tmin: f64, tmax: f64, steps: usize) -> Result<Vec<f64>, JsValue> {
    js(trajectory(mu, nu, kappa, coords, tmin, tmax, steps))
}

#[wasm_bindgen(js_name = phaseShifts)]
pub fn phase_shifts_js(mu: f64, nu: f64, kappa: f64, momenta: &[f64]) -> Result<Vec<f64>, JsValue> {
    js(phase_shifts(mu, nu, kappa, momenta))
}
