//! `dualize`: one application of the duality map or its inverse, with the roundtrip residual.

use bcn_core::duality::{
    abc_spectrum_extended, dualize_r_to_s, dualize_s_to_r_with, verify_theta_extended, DualityDiagnostics,
    DualityOptions,
};
use bcn_core::matengine::PrecisionConfig;
use bcn_core::{Couplings, PhasePointR, PhasePointS};
use serde::{Deserialize, Serialize};

use crate::config::{extended_bits, InitialPoint};
use crate::error::CliError;
use crate::simulate::CouplingsJson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Sutherland `(q, p)` to RSvD `(lambda, theta)`.
    S2r,
    /// RSvD `(lambda, theta)` to Sutherland `(q, p)`.
    R2s,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointJson {
    Sutherland { q: Vec<f64>, p: Vec<f64> },
    Rsvd { lambda: Vec<f64>, theta: Vec<f64> },
}

impl From<&PhasePointS> for PointJson {
    fn from(pt: &PhasePointS) -> Self {
        PointJson::Sutherland { q: pt.q.as_slice().to_vec(), p: pt.p.clone() }
    }
}

impl From<&PhasePointR> for PointJson {
    fn from(pt: &PhasePointR) -> Self {
        PointJson::Rsvd { lambda: pt.lambda.as_slice().to_vec(), theta: pt.theta.clone() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsJson {
    pub spectrum_imag_max: f64,
    pub newton_iters: usize,
    pub seed_error: f64,
    /// `null` when the `t -> infinity` limit seed was used.
    pub seed_time: Option<f64>,
    pub inversion_residual: f64,
}

impl From<&DualityDiagnostics> for DiagnosticsJson {
    fn from(d: &DualityDiagnostics) -> Self {
        DiagnosticsJson {
            spectrum_imag_max: d.spectrum_imag_max,
            newton_iters: d.newton_iters,
            seed_error: d.seed_error,
            seed_time: d.seed_time.is_finite().then_some(d.seed_time),
            inversion_residual: d.inversion_residual,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DualizeReport {
    pub direction: Direction,
    pub couplings: CouplingsJson,
    pub input: PointJson,
    pub output: PointJson,
    pub diagnostics: DiagnosticsJson,
    /// Sup-norm distance between the input and the image of the output under the reverse map.
    pub roundtrip_residual: f64,
    /// Extended precision only: deviation of the extended-arithmetic recomputation.
    pub extended_check: Option<f64>,
}

/// Splits flat coordinates `x_1..x_n, y_1..y_n` into a point of the phase space `direction` maps from.
pub fn point_from_coords(coords: &[f64], direction: Direction) -> Result<InitialPoint, CliError> {
    if coords.is_empty() || coords.len() % 2 != 0 {
        return Err(CliError::Config(format!(
            "a point needs 2n coordinates (positions then momenta), got {}",
            coords.len()
        )));
    }
    let n = coords.len() / 2;
    let (x, y) = (coords[..n].to_vec(), coords[n..].to_vec());
    let bad = |e: bcn_core::Error| CliError::Config(e.to_string());
    Ok(match direction {
        Direction::S2r => InitialPoint::Sutherland(PhasePointS::new(x, y).map_err(bad)?),
        Direction::R2s => InitialPoint::Rsvd(PhasePointR::new(x, y).map_err(bad)?),
    })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn dualize(point: &InitialPoint, c: &Couplings, prec: &PrecisionConfig) -> Result<DualizeReport, CliError> {
    let bits = extended_bits(prec);
    match point {
        InitialPoint::Sutherland(pt) => {
            let opts = DualityOptions { prec: *prec, ..Default::default() };
            let res = dualize_s_to_r_with(pt, c, &opts)?;
            let back = dualize_r_to_s(&res.point, c)?.point;
            let extended_check = match bits {
                Some(b) => Some(verify_theta_extended(pt, c, &res.point, Some(b))?),
                None => None,
            };
            Ok(DualizeReport {
                direction: Direction::S2r,
                couplings: c.into(),
                input: pt.into(),
                output: (&res.point).into(),
                diagnostics: (&res.diagnostics).into(),
                roundtrip_residual: sup_diff(&back.to_vec(), &pt.to_vec()),
                extended_check,
            })
        }
        InitialPoint::Rsvd(pt) => {
            let res = dualize_r_to_s(pt, c)?;
            let opts = DualityOptions { prec: *prec, ..Default::default() };
            let back = dualize_s_to_r_with(&res.point, c, &opts)?.point;
            let extended_check = match bits {
                Some(b) => {
                    let logs = abc_spectrum_extended(pt, c, b)?;
                    Some(sup_diff(res.point.q.as_slice(), &logs))
                }
                None => None,
            };
            Ok(DualizeReport {
                direction: Direction::R2s,
                couplings: c.into(),
                input: pt.into(),
                output: (&res.point).into(),
                diagnostics: (&res.diagnostics).into(),
                roundtrip_residual: sup_diff(&back.to_vec(), &pt.to_vec()),
                extended_check,
            })
        }
    }
}
