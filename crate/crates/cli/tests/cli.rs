use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn modspace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modspace")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

const NORM_ZERO: &str = r#"
[grid]
dim = 1
n = 128
length = 16.0

[norm]
datum = { kind = "zero" }
specs = [{ p = 2, q = 2 }, { p = "inf", q = 1, s = 1 }]
"#;

const NORM_RANDOM: &str = r#"
seed = 5
format = "csv"

[grid]
dim = 1
n = 256
length = 16.0

[norm]
datum = { kind = "random_bandlimited", band = 3.0 }
specs = [{ p = 2, q = 1 }, { p = 4, q = "4/3", s = 0.5 }]
"#;

const EVOLVE: &str = r#"
[grid]
dim = 1
n = 128
length = 16.0

[evolve]
equation = "fhnls"
alpha = 2.0
datum = { kind = "gaussian", amplitude = 0.2 }

[evolve.kernel]
type = "riesz"
lambda = 1.0
gamma = 0.5

[evolve.solve]
horizon = 0.5
dt = 0.05
"#;

#[test]
fn admissible_example_point() {
    let v = stdout_json(&modspace(&["admissible", "--d", "5", "--p", "2.5", "--r", "3"]));
    assert_eq!(v["feasible"], Value::Bool(true));
    assert_eq!(v["beta"], 3);
    assert_eq!(v["case"], "I");
}

#[test]
fn admissible_scan_writes_a_region_table() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("scan");
    let v = stdout_json(&modspace(&[
        "admissible", "--equation", "klein-gordon", "--d", "3", "--p", "2", "--scan", "--p-steps", "4", "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(v["rows"], 4 * 7);
    let table = std::fs::read_to_string(out.join("region.csv")).unwrap();
    assert!(table.lines().any(|l| l == "d,p,r,feasible,case_tag"));
}

#[test]
fn embed_reports_exact_margin() {
    let v = stdout_json(&modspace(&["embed", "--d", "1", "--p", "2", "--q", "1", "--s1", "0.5", "--s2", "-0.5"]));
    assert_eq!(v["holds"], Value::Bool(true));
    assert_eq!(v["tau"], "1/2");
    assert_eq!(v["margin"], "1/2");
}

#[test]
fn zero_field_has_zero_norms() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), NORM_ZERO);
    let out = dir.path().join("out");
    let v = stdout_json(&modspace(&["norm", "--config", &cfg, "--out", out.to_str().unwrap()]));
    let records = v["records"].as_array().unwrap();
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| r["value"] == 0.0));
    assert!(out.join("norms.json").exists());
    assert!(out.join("run.log").exists());
}

#[test]
fn csv_artifacts_carry_metadata_header() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), NORM_RANDOM);
    let out = dir.path().join("out");
    stdout_json(&modspace(&["norm", "--config", &cfg, "--out", out.to_str().unwrap()]));
    let table = std::fs::read_to_string(out.join("norms.csv")).unwrap();
    for key in ["config_sha256=", "seed=5", "fourier=", "weight="] {
        assert!(table.lines().any(|l| l.starts_with('#') && l.contains(key)), "missing {key}:\n{table}");
    }
}

#[test]
fn same_seed_gives_identical_artifacts() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), NORM_RANDOM);
    let run = |name: &str| {
        let out = dir.path().join(name);
        stdout_json(&modspace(&["norm", "--config", &cfg, "--out", out.to_str().unwrap()]));
        std::fs::read(out.join("norms.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
    let other = dir.path().join("c");
    stdout_json(&modspace(&["norm", "--config", &cfg, "--seed", "6", "--out", other.to_str().unwrap()]));
    assert_ne!(run("a"), std::fs::read(other.join("norms.csv")).unwrap());
}

#[test]
fn step_larger_than_horizon_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &EVOLVE.replace("dt = 0.05", "dt = 1.0"));
    let out = modspace(&["evolve", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("solve.dt"), "{}", stderr(&out));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn unknown_key_names_its_path() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &EVOLVE.replace("gamma = 0.5", "gamma = 0.5\nbeta = 1"));
    let out = modspace(&["evolve", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("evolve.kernel"), "{}", stderr(&out));
}

#[test]
fn evolve_writes_diagnostics_snapshots_and_report() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), EVOLVE);
    let out = dir.path().join("out");
    let v = stdout_json(&modspace(&["evolve", "--config", &cfg, "--out", out.to_str().unwrap()]));
    assert_eq!(v["termination"]["status"], "completed");
    let diag = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let header = diag.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "t,M(2;2;0),mass,energy,escaping");
    assert_eq!(diag.lines().filter(|l| !l.starts_with('#')).count(), 1 + 11);
    assert!(out.join("snapshots/u_00010.mspf").exists());
    let report: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["steps"], 10);
}

#[test]
fn verify_lists_estimates() {
    let v = stdout_json(&modspace(&["verify", "--list"]));
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap()).collect();
    for id in ["algebra", "hls", "kg_decay", "strichartz_kg"] {
        assert!(ids.contains(&id), "{id} missing from {ids:?}");
    }
}

#[test]
fn small_verify_run_is_consistent() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "seed = 3\n[verify]\nestimate = \"hls\"\n[verify.corpus]\ncount = 20\n",
    );
    let out = dir.path().join("out");
    let v = stdout_json(&modspace(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]));
    assert_eq!(v["estimate"], "hls");
    assert_eq!(v["verdict"], "consistent");
    let ratios = std::fs::read_to_string(out.join("ratios.csv")).unwrap();
    assert!(ratios.lines().any(|l| l == "index,split,ratio"));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let out = modspace(&["norm", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(1));
}
