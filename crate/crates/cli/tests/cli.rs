use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bcn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcn")).args(args).output().expect("spawn bcn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn write_config(dir: &Path, name: &str, body: Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(&body).unwrap()).unwrap();
    path
}

fn single_particle(dir: &Path, kappa: f64) -> PathBuf {
    write_config(
        dir,
        "s1.json",
        serde_json::json!({
            "model": "sutherland", "mu": -0.8, "nu": 1.3, "kappa": kappa,
            "q": [1.1], "p": [0.4], "tmin": -1.0, "tmax": 1.0, "steps": 3,
        }),
    )
}

fn json_f64s(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn simulate_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = single_particle(dir.path(), 0.6);
    let out = dir.path().join("traj.csv");
    let o = bcn(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,q1,p1");
    assert_eq!(lines.len(), 4);
    let side: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("traj.json")).unwrap()).unwrap();
    assert_eq!(side["n"], 1);
    assert!(side["energy_drift"].as_f64().unwrap() < 1e-9);
}

#[test]
fn simulate_without_output_path_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = single_particle(dir.path(), 0.6);
    let o = bcn(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn negative_kappa_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = single_particle(dir.path(), -0.1);
    let out = dir.path().join("traj.csv");
    let o = bcn(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("kappa"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        serde_json::json!({ "model": "rsvd", "mu": -0.8, "nu": 1.3, "kappa": 0.6, "lambda": [1.0], "theta": [0.0], "colour": 3 }),
    );
    let o = bcn(&["scatter", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn outputs_are_reproducible_without_timestamps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = single_particle(dir.path(), 0.6);
    let mut runs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let o = bcn(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--no-timestamp"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let csv = fs::read(&out).unwrap();
        let mut side: Value = serde_json::from_slice(&fs::read(out.with_extension("json")).unwrap()).unwrap();
        assert!(side["generated_at"].is_null());
        side["csv"] = Value::Null;
        runs.push((csv, side));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn dualize_round_trip_through_both_directions() {
    let coupling = ["--mu", "-0.7", "--nu", "1.1", "--kappa", "0.4"];
    let mut args = vec!["dualize", "--direction", "r2s", "--coords", "1.5,0.6,0.3,-0.2"];
    args.extend(coupling);
    let o = bcn(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    let q = json_f64s(&rep["output"]["q"]);
    let p = json_f64s(&rep["output"]["p"]);
    assert!(rep["roundtrip_residual"].as_f64().unwrap() < 1e-8);

    let coords: Vec<String> = q.iter().chain(&p).map(|x| format!("{x:e}")).collect();
    let joined = coords.join(",");
    let mut back = vec!["dualize", "--direction", "s2r", "--coords", &joined];
    back.extend(coupling);
    let o = bcn(&back);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    let lambda = json_f64s(&rep["output"]["lambda"]);
    let theta = json_f64s(&rep["output"]["theta"]);
    for (got, want) in lambda.iter().chain(&theta).zip([1.5, 0.6, 0.3, -0.2]) {
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }
}

#[test]
fn malformed_point_is_a_usage_error() {
    let o = bcn(&["dualize", "--direction", "s2r", "--coords", "1.0,2.0,0.5", "--mu", "-0.7", "--nu", "1.1", "--kappa", "0.4"]);
    assert_eq!(code(&o), 2);
    // positions out of chamber order
    let o = bcn(&["dualize", "--direction", "s2r", "--coords", "0.5,2.0,0.1,0.1", "--mu", "-0.7", "--nu", "1.1", "--kappa", "0.4"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn scatter_sutherland_two_particles_passes() {
    let cfg = configs().join("sutherland_n2.json");
    let o = bcn(&["scatter", "--config", cfg.to_str().unwrap(), "--no-timestamp"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["verdict"], "pass");
    assert!(rep["phase_shift"]["max_deviation"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn scatter_rsvd_single_particle_matches_scattering_map() {
    let cfg = configs().join("rsvd_n1.json");
    let o = bcn(&["scatter", "--config", cfg.to_str().unwrap(), "--no-timestamp"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["verdict"], "pass");
    assert!(rep["phase_shift"].is_null());
    assert!(rep["scattering_map"]["max_deviation"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn verify_core_suite_passes() {
    let o = bcn(&["verify", "--suite", "core"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["passed"], true);
}

#[test]
fn injected_fault_is_caught() {
    let o = bcn(&["verify", "--suite", "lax", "--inject-fault", "delta-sign"]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("lax.minor_identity"), "{err}");
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed: Vec<&str> = rep["failed"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(failed, ["lax.minor_identity"]);
}
