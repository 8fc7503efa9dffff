//! `simulate`: a trajectory on a uniform grid, written as CSV plus a JSON sidecar.

use std::path::Path;

use bcn_core::duality::{abc_spectrum_extended, dualize_r_to_s, dualize_s_to_r_with, verify_theta_extended, DualityOptions};
use bcn_core::dynamics::{conserved_actions, solve_rsvd, solve_sutherland, OdeStats, TimeGrid, Trajectory};
use bcn_core::{Couplings, PhasePointR, PhasePointS};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::{extended_bits, InitialPoint, MethodKind, ModelKind, RunConfig};
use crate::error::CliError;
use crate::output::{sidecar_path, timestamp, write_csv};

#[derive(Debug, Clone, Serialize)]
pub struct CouplingsJson {
    pub mu: f64,
    pub nu: f64,
    pub kappa: f64,
}

impl From<&Couplings> for CouplingsJson {
    fn from(c: &Couplings) -> Self {
        CouplingsJson { mu: c.mu(), nu: c.nu(), kappa: c.kappa() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OdeStatsJson {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl From<OdeStats> for OdeStatsJson {
    fn from(s: OdeStats) -> Self {
        OdeStatsJson { accepted: s.accepted, rejected: s.rejected, evaluations: s.evaluations }
    }
}

/// The same run repeated with the other method.
#[derive(Debug, Clone, Serialize)]
pub struct CrossCheck {
    pub method: MethodKind,
    /// Sup-norm distance between the two trajectories over the whole grid.
    pub sup_diff: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sidecar {
    pub model: ModelKind,
    pub method: MethodKind,
    pub n: usize,
    pub couplings: CouplingsJson,
    pub tmin: f64,
    pub tmax: f64,
    pub steps: usize,
    pub precision: String,
    pub energy: f64,
    pub energy_drift: f64,
    /// Sutherland: `lambda`; RSvD: `q`, at the grid point nearest `t = 0`.
    pub conserved_actions: Vec<f64>,
    pub conserved_actions_max_deviation: f64,
    pub max_newton_iters: usize,
    pub ode_stats: Option<OdeStatsJson>,
    pub cross_check: CrossCheck,
    /// Extended precision only: deviation of the initial dual data recomputed in extended arithmetic.
    pub extended_check: Option<f64>,
    pub csv: String,
    pub generated_at: Option<u64>,
}

pub struct Simulation {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub sidecar: Sidecar,
}

pub fn header(model: ModelKind, n: usize) -> Vec<String> {
    let (x, y) = match model {
        ModelKind::Sutherland => ("q", "p"),
        ModelKind::Rsvd => ("lambda", "theta"),
    };
    std::iter::once("t".to_string())
        .chain((1..=n).map(|a| format!("{x}{a}")))
        .chain((1..=n).map(|a| format!("{y}{a}")))
        .collect()
}

fn rows(grid: &TimeGrid, states: &[Vec<f64>]) -> Vec<Vec<f64>> {
    grid.as_slice()
        .iter()
        .zip(states)
        .map(|(t, s)| std::iter::once(*t).chain(s.iter().copied()).collect())
        .collect()
}

fn sup_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

fn action_drift(m: &DMatrix<f64>, k0: usize) -> (Vec<f64>, f64) {
    let first: Vec<f64> = m.row(k0).iter().copied().collect();
    let dev = (0..m.nrows())
        .flat_map(|k| (0..m.ncols()).map(move |a| (k, a)))
        .map(|(k, a)| (m[(k, a)] - first[a]).abs())
        .fold(0.0, f64::max);
    (first, dev)
}

struct Run {
    states: Vec<Vec<f64>>,
    energy: f64,
    energy_drift: f64,
    actions: DMatrix<f64>,
    newton: usize,
    ode_stats: Option<OdeStats>,
}

fn finish<P>(tr: Trajectory<P>, flat: impl Fn(&P) -> Vec<f64>, actions: DMatrix<f64>) -> Run {
    let k0 = tr.grid.nearest_zero();
    Run {
        states: tr.states.iter().map(flat).collect(),
        energy: tr.diagnostics[k0].energy,
        energy_drift: tr.energy_drift,
        actions,
        newton: tr.diagnostics.iter().map(|d| d.newton_iters).max().unwrap_or(0),
        ode_stats: tr.ode_stats,
    }
}

fn run_once(point: &InitialPoint, grid: &TimeGrid, c: &Couplings, method: MethodKind) -> Result<Run, bcn_core::Error> {
    match point {
        InitialPoint::Sutherland(pt) => {
            let tr = solve_sutherland(pt, grid, c, method.to_core())?;
            let actions = conserved_actions(&tr, c)?;
            Ok(finish(tr, PhasePointS::to_vec, actions))
        }
        InitialPoint::Rsvd(pt) => {
            let tr = solve_rsvd(pt, grid, c, method.to_core())?;
            let actions = conserved_actions(&tr, c)?;
            Ok(finish(tr, PhasePointR::to_vec, actions))
        }
    }
}

fn extended_check(point: &InitialPoint, c: &Couplings, cfg: &RunConfig) -> Result<Option<f64>, CliError> {
    let prec = cfg.precision_config()?;
    let Some(bits) = extended_bits(&prec) else {
        return Ok(None);
    };
    let dev = match point {
        InitialPoint::Sutherland(pt) => {
            let opts = DualityOptions { prec, ..Default::default() };
            let dual = dualize_s_to_r_with(pt, c, &opts)?.point;
            verify_theta_extended(pt, c, &dual, Some(bits))?
        }
        InitialPoint::Rsvd(pt) => {
            let q = dualize_r_to_s(pt, c)?.point.q;
            let logs = abc_spectrum_extended(pt, c, bits)?;
            q.as_slice().iter().zip(&logs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        }
    };
    Ok(Some(dev))
}

/// Runs the configured simulation without touching the file system.
pub fn simulate(cfg: &RunConfig, timestamps: bool) -> Result<Simulation, CliError> {
    let (c, point) = cfg.validate()?;
    let grid = TimeGrid::uniform(cfg.tmin, cfg.tmax, cfg.steps)?;
    let n = match &point {
        InitialPoint::Sutherland(p) => p.n(),
        InitialPoint::Rsvd(p) => p.n(),
    };
    let run = run_once(&point, &grid, &c, cfg.method)?;
    let other = cfg.method.other();
    let cross_check = match run_once(&point, &grid, &c, other) {
        Ok(r) => CrossCheck { method: other, sup_diff: Some(sup_diff(&run.states, &r.states)), error: None },
        Err(e) => CrossCheck { method: other, sup_diff: None, error: Some(e.to_string()) },
    };
    let (actions0, actions_dev) = action_drift(&run.actions, grid.nearest_zero());
    let csv = cfg
        .out
        .as_ref()
        .and_then(|p| p.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let sidecar = Sidecar {
        model: cfg.model,
        method: cfg.method,
        n,
        couplings: (&c).into(),
        tmin: cfg.tmin,
        tmax: cfg.tmax,
        steps: cfg.steps,
        precision: cfg.precision.clone(),
        energy: run.energy,
        energy_drift: run.energy_drift,
        conserved_actions: actions0,
        conserved_actions_max_deviation: actions_dev,
        max_newton_iters: run.newton,
        ode_stats: run.ode_stats.map(Into::into),
        cross_check,
        extended_check: extended_check(&point, &c, cfg)?,
        csv,
        generated_at: timestamp(timestamps),
    };
    Ok(Simulation { header: header(cfg.model, n), rows: rows(&grid, &run.states), sidecar })
}

/// `simulate` end to end: CSV at `out`, sidecar next to it.
pub fn cmd_simulate(cfg: &RunConfig, timestamps: bool) -> Result<(), CliError> {
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| CliError::Config("no output path: set `out` in the config or pass --out".into()))?;
    let sim = simulate(cfg, timestamps)?;
    write_csv(&out, &sim.header, &sim.rows)?;
    crate::output::emit_json(&sim.sidecar, Some(&sidecar_path(Path::new(&out))))?;
    Ok(())
}
