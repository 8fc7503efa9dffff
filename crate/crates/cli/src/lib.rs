//! Command-line driver for `bcn-core`.
//!
//! Subcommands: `simulate` (trajectory CSV plus JSON sidecar), `dualize` (one application of the
//! duality map), `scatter` (asymptotic report) and `verify` (invariant suites).
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration error, 3 numeric failure.

pub mod config;
pub mod dualize;
pub mod error;
pub mod output;
pub mod scatter;
pub mod simulate;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_precision, InitialPoint, MethodKind, ModelKind, Overrides, RunConfig};
use crate::dualize::{point_from_coords, Direction};
use crate::error::CliError;
use crate::verify::{Fault, Suite};

#[derive(Debug, Parser)]
#[command(name = "bcn", version, about = "BC_n Sutherland and RSvD systems: trajectories, duality, scattering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct RunFlags {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long, value_enum)]
    pub method: Option<MethodKind>,
    #[arg(long, allow_hyphen_values = true)]
    pub tmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// `double` or `extended:<bits>`.
    #[arg(long)]
    pub precision: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Leave the timestamp out of JSON output, making it byte-for-byte reproducible.
    #[arg(long)]
    pub no_timestamp: bool,
}

impl RunFlags {
    fn overrides(&self) -> Overrides {
        Overrides {
            model: self.model,
            method: self.method,
            tmin: self.tmin,
            tmax: self.tmax,
            steps: self.steps,
            precision: self.precision.clone(),
            out: self.out.clone(),
        }
    }

    fn load(&self) -> Result<RunConfig, CliError> {
        let path = self.config.as_ref().ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
        let mut cfg = RunConfig::load(path)?;
        cfg.apply(&self.overrides());
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a trajectory and write it as CSV with a JSON diagnostics sidecar.
    Simulate(RunFlags),
    /// Map a point between the Sutherland and RSvD phase spaces.
    Dualize(DualizeArgs),
    /// Compare fitted asymptotes with the wave and scattering maps.
    Scatter(RunFlags),
    /// Run invariant suites; exits 1 listing the failed checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct DualizeArgs {
    /// JSON run configuration; its model picks the direction.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub direction: Option<Direction>,
    /// Inline point: positions then momenta, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "config")]
    pub coords: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "config")]
    pub mu: Option<f64>,
    #[arg(long, conflicts_with = "config")]
    pub nu: Option<f64>,
    #[arg(long, conflicts_with = "config")]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub precision: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Write the JSON summary here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

fn cmd_dualize(a: &DualizeArgs) -> Result<(), CliError> {
    let (c, point, precision) = match &a.config {
        Some(path) => {
            let cfg = RunConfig::load(path)?;
            let c = cfg.couplings()?;
            let point = cfg.initial_point()?;
            let implied = match point {
                InitialPoint::Sutherland(_) => Direction::S2r,
                InitialPoint::Rsvd(_) => Direction::R2s,
            };
            if a.direction.is_some_and(|d| d != implied) {
                return Err(CliError::Config(format!(
                    "direction {:?} does not match the configured {:?} point",
                    a.direction.unwrap(),
                    cfg.model
                )));
            }
            (c, point, a.precision.clone().unwrap_or(cfg.precision))
        }
        None => {
            let coords = a.coords.as_ref().ok_or_else(|| CliError::Config("give --config or --coords".into()))?;
            let need = |v: Option<f64>, name: &str| v.ok_or_else(|| CliError::Config(format!("--{name} is required with --coords")));
            let c = bcn_core::Couplings::new(need(a.mu, "mu")?, need(a.nu, "nu")?, need(a.kappa, "kappa")?)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let point = point_from_coords(coords, a.direction.unwrap_or(Direction::S2r))?;
            (c, point, a.precision.clone().unwrap_or_else(|| "double".into()))
        }
    };
    let prec = parse_precision(&precision)?;
    let report = dualize::dualize(&point, &c, &prec)?;
    output::emit_json(&report, a.out.as_deref())
}

fn cmd_scatter(f: &RunFlags) -> Result<(), CliError> {
    let cfg = f.load()?;
    let report = scatter::scatter(&cfg, !f.no_timestamp)?;
    output::emit_json(&report, f.out.as_deref())?;
    if report.verdict != "pass" {
        return Err(CliError::Verification("scattering report verdict is fail".into()));
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let (report, secs) = verify::run_timed(a.suite, a.seed, a.inject_fault);
    output::emit_json(&report, a.out.as_deref())?;
    for r in &report.checks {
        let status = if r.passed { "ok" } else { "FAILED" };
        let value = r.value.map_or_else(|| r.detail.clone().unwrap_or_default(), |v| format!("{v:.3e}"));
        eprintln!("{status:>6}  {:<48} {value} (tol {:.0e})", r.id, r.tol);
    }
    eprintln!("{} checks in {secs:.1} s", report.checks.len());
    if !report.passed {
        return Err(CliError::Verification(format!("failed checks: {}", report.failed.join(", "))));
    }
    Ok(())
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(f) => {
            let cfg = f.load()?;
            simulate::cmd_simulate(&cfg, !f.no_timestamp)
        }
        Command::Dualize(a) => cmd_dualize(a),
        Command::Scatter(f) => cmd_scatter(f),
        Command::Verify(a) => cmd_verify(a),
    }
}
