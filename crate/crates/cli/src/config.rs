//! Run configuration: a flat JSON object, optionally overridden from the command line.

use std::path::{Path, PathBuf};

use bcn_core::matengine::PrecisionConfig;
use bcn_core::{Couplings, PhasePointR, PhasePointS};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Sutherland,
    Rsvd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    #[default]
    Duality,
    Ode,
}

impl MethodKind {
    pub fn to_core(self) -> bcn_core::dynamics::Method {
        match self {
            MethodKind::Duality => bcn_core::dynamics::Method::Duality,
            MethodKind::Ode => bcn_core::dynamics::Method::Ode,
        }
    }

    pub fn other(self) -> MethodKind {
        match self {
            MethodKind::Duality => MethodKind::Ode,
            MethodKind::Ode => MethodKind::Duality,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Particle number; inferred from the initial point when absent.
    #[serde(default)]
    pub n: Option<usize>,
    pub mu: f64,
    pub nu: f64,
    pub kappa: f64,
    pub model: ModelKind,
    #[serde(default)]
    pub q: Option<Vec<f64>>,
    #[serde(default)]
    pub p: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda: Option<Vec<f64>>,
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    #[serde(default = "default_tmin")]
    pub tmin: f64,
    #[serde(default = "default_tmax")]
    pub tmax: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub method: MethodKind,
    /// `double` or `extended:<bits>`.
    #[serde(default = "default_precision")]
    pub precision: String,
    /// Trajectory CSV; the JSON sidecar goes next to it with extension `json`.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_tmin() -> f64 {
    -5.0
}

fn default_tmax() -> f64 {
    5.0
}

fn default_steps() -> usize {
    101
}

fn default_precision() -> String {
    "double".into()
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<ModelKind>,
    pub method: Option<MethodKind>,
    pub tmin: Option<f64>,
    pub tmax: Option<f64>,
    pub steps: Option<usize>,
    pub precision: Option<String>,
    pub out: Option<PathBuf>,
}

/// The initial point in whichever phase space the model lives on.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialPoint {
    Sutherland(PhasePointS),
    Rsvd(PhasePointR),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(m) = o.model {
            self.model = m;
        }
        if let Some(m) = o.method {
            self.method = m;
        }
        if let Some(t) = o.tmin {
            self.tmin = t;
        }
        if let Some(t) = o.tmax {
            self.tmax = t;
        }
        if let Some(s) = o.steps {
            self.steps = s;
        }
        if let Some(p) = &o.precision {
            self.precision = p.clone();
        }
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
    }

    pub fn couplings(&self) -> Result<Couplings, CliError> {
        Couplings::new(self.mu, self.nu, self.kappa).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn precision_config(&self) -> Result<PrecisionConfig, CliError> {
        parse_precision(&self.precision)
    }

    /// Checks the grid and returns the initial point of the configured model.
    pub fn validate(&self) -> Result<(Couplings, InitialPoint), CliError> {
        let c = self.couplings()?;
        self.precision_config()?;
        if self.steps < 2 {
            return Err(CliError::Config(format!("steps must be at least 2, got {}", self.steps)));
        }
        if !(self.tmin < self.tmax) || !self.tmin.is_finite() || !self.tmax.is_finite() {
            return Err(CliError::Config(format!("need tmin < tmax, got {} and {}", self.tmin, self.tmax)));
        }
        let point = self.initial_point()?;
        Ok((c, point))
    }

    pub fn initial_point(&self) -> Result<InitialPoint, CliError> {
        let (x, y, names) = match self.model {
            ModelKind::Sutherland => (&self.q, &self.p, ("q", "p")),
            ModelKind::Rsvd => (&self.lambda, &self.theta, ("lambda", "theta")),
        };
        let x = x.clone().ok_or_else(|| CliError::Config(format!("missing `{}`", names.0)))?;
        let y = y.clone().ok_or_else(|| CliError::Config(format!("missing `{}`", names.1)))?;
        if let Some(n) = self.n {
            for (name, len) in [(names.0, x.len()), (names.1, y.len())] {
                if len != n {
                    return Err(CliError::Config(format!("`{name}` has length {len}, expected n = {n}")));
                }
            }
        }
        let bad = |e: bcn_core::Error| CliError::Config(e.to_string());
        Ok(match self.model {
            ModelKind::Sutherland => InitialPoint::Sutherland(PhasePointS::new(x, y).map_err(bad)?),
            ModelKind::Rsvd => InitialPoint::Rsvd(PhasePointR::new(x, y).map_err(bad)?),
        })
    }
}

pub fn parse_precision(s: &str) -> Result<PrecisionConfig, CliError> {
    if s == "double" {
        return Ok(PrecisionConfig::double());
    }
    let bits = s
        .strip_prefix("extended:")
        .and_then(|b| b.parse::<u32>().ok())
        .ok_or_else(|| CliError::Config(format!("precision must be `double` or `extended:<bits>`, got `{s}`")))?;
    PrecisionConfig::extended(bits).map_err(|e| CliError::Config(e.to_string()))
}

/// Extended-precision bit count, if any.
pub fn extended_bits(p: &PrecisionConfig) -> Option<u32> {
    match p.mode {
        bcn_core::matengine::Precision::Extended { bits } => Some(bits),
        bcn_core::matengine::Precision::Double => None,
    }
}
