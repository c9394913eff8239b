//! End-to-end behavior of the `shortfall` binary: exit codes, output
//! placement, formats, and the per-slot trace.

use std::path::Path;
use std::process::{Command, Output};

fn shortfall(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shortfall"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.display().to_string()
}

const KNOWN: &str = r#"
version = 1

[instance]
kind = "known"
budget = 4.0
costs = [ { kind = "sqrt", scale = 1.0 }, { kind = "linear", slope = 1.0 } ]
mean_rates = [4.0, 2.0]
"#;

const KNOWN_WITH_SIM: &str = r#"
version = 1

[instance]
kind = "known"
budget = 2.0
costs = [ { kind = "linear", slope = 1.0 }, { kind = "linear", slope = 1.0 } ]
mean_rates = [1.0, 2.0]

[simulation]
horizon = 50000
seed = 4
availability = { kind = "constant", value = 2.0 }
consumption = [
  { kind = "deterministic", rate = 1.0 },
  { kind = "deterministic", rate = 2.0 },
]
"#;

#[test]
#[allow(clippy::approx_constant)] // asserting the documented 12-digit rounding
fn solve_known_prints_json_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "known.toml", KNOWN);
    let out = shortfall(&["solve-known", &scenario], dir.path());
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["true_objective"].as_f64().unwrap(), 0.707106781187);
    assert_eq!(doc["allocation"], serde_json::json!([2.0, 2.0]));
}

#[test]
fn csv_format_has_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "known.toml", KNOWN);
    let out = shortfall(&["solve-known", &scenario, "--format", "csv"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "user,mean_rate,rate,shortfall,dissatisfaction,lp_objective,true_objective,budget,slack,build"
    );
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn missing_file_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = shortfall(&["solve-known", "nope.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn negative_budget_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "bad.toml", &KNOWN.replace("budget = 4.0", "budget = -4.0"));
    let out = shortfall(&["solve-known", &scenario], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("budget must be positive"), "{err}");
}

#[test]
fn unknown_key_is_input_error_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "bad.toml", &KNOWN.replace("budget = 4.0", "budget = 4.0\nbogus = 1"));
    let out = shortfall(&["solve-known", &scenario], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bogus"), "{err}");
}

#[test]
fn asymmetric_unknown_solve_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "asym.toml",
        r#"
version = 1

[instance]
kind = "unknown"
budget = 2.0
costs = [ { kind = "linear", slope = 1.0 }, { kind = "linear", slope = 2.0 } ]
priors = [
  { kind = "uniform", lo = 1.0, hi = 2.0 },
  { kind = "uniform", lo = 0.5, hi = 2.0 },
]
"#,
    );
    let out = shortfall(&["solve-unknown", &scenario], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_flags_mean_mismatch_with_exit_one() {
    // The instance declares rates (1, 2) but the processes consume (2, 1):
    // the cross-consistency row fails and verify exits 1.
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "mismatch.toml",
        r#"
version = 1

[instance]
kind = "known"
budget = 2.0
costs = [ { kind = "linear", slope = 1.0 }, { kind = "linear", slope = 1.0 } ]
mean_rates = [1.0, 2.0]

[simulation]
horizon = 50000
seed = 4
availability = { kind = "constant", value = 2.0 }
consumption = [
  { kind = "deterministic", rate = 2.0 },
  { kind = "deterministic", rate = 1.0 },
]
"#,
    );
    let out = shortfall(&["verify", &scenario], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("FAIL  consumption-means-match-instance"), "{table}");
}

#[test]
fn verify_passes_consistent_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "ok.toml", KNOWN_WITH_SIM);
    let out = shortfall(&["verify", &scenario], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(!table.contains("FAIL"), "{table}");
}

#[test]
fn simulate_writes_trace_rows() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "sim.toml",
        &KNOWN_WITH_SIM.replace("horizon = 50000", "horizon = 64"),
    );
    let trace = dir.path().join("trace.csv");
    let out = shortfall(
        &["simulate", &scenario, "--trace", trace.to_str().unwrap(), "--out", "result.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace_text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(trace_text.lines().next().unwrap(), "t,c,s0,s1,f0,f1,q0,q1,kappa0,kappa1");
    assert_eq!(trace_text.lines().count(), 65);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("result.json")).unwrap())
            .unwrap();
    // Greedy serves user 1 fully (ratio 1 vs 1), user 0 gets the rest:
    // steady-state shortfall (0, 1).
    assert_eq!(doc["result"]["avg_shortfall"], serde_json::json!([0.0, 1.0]));
}

#[test]
fn multiple_scenarios_fan_out_to_directory() {
    let dir = tempfile::tempdir().unwrap();
    let s1 = write(dir.path(), "a.toml", KNOWN);
    let s2 = write(dir.path(), "b.toml", &KNOWN.replace("budget = 4.0", "budget = 2.0"));
    let out_dir = dir.path().join("results");
    let out = Command::new(env!("CARGO_BIN_EXE_shortfall"))
        .args(["solve-known", &s1, &s2, "--out"])
        .arg(&out_dir)
        .env("SHORTFALL_WORKERS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("a.json").exists());
    assert!(out_dir.join("b.json").exists());
}

#[test]
fn scenario_output_section_places_file() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "with_output.toml",
        &format!("{KNOWN}\n[output]\npath = \"from_section.json\"\nformat = \"json\"\n"),
    );
    let out = shortfall(&["solve-known", &scenario], dir.path());
    assert!(out.status.success());
    assert!(dir.path().join("from_section.json").exists());
}

#[test]
fn zero_horizon_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "zero.toml",
        &KNOWN_WITH_SIM.replace("horizon = 50000", "horizon = 0"),
    );
    let out = shortfall(&["simulate", &scenario], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
