//! End-to-end runs of the `antisym` binary.

use std::process::{Command, Output};

use serde_json::Value;

fn antisym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_antisym")).args(args).output().expect("binary runs")
}

fn summary(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn constants_summary() {
    let out = antisym(&["constants", "--n", "1", "--s", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = &summary(&out)["summary"];
    let inv_pi = 1.0 / std::f64::consts::PI;
    for key in ["c_ns", "gamma_ns", "tilde_c"] {
        assert!((v[key].as_f64().unwrap() - inv_pi).abs() < 1e-7, "{key}");
    }
    assert!((v["halfspace_integral"].as_f64().unwrap() - 1.0).abs() < 1e-7);
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ \"command\": \"constants\", ").unwrap();
    let out = antisym(&["--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&path, r#"{"command": "constants", "unknown_key": 1}"#).unwrap();
    assert_eq!(antisym(&["--config", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn s_outside_cli_range_is_a_usage_error() {
    assert_eq!(antisym(&["constants", "--s", "0.97"]).status.code(), Some(2));
    assert_eq!(antisym(&["constants", "--n", "4"]).status.code(), Some(2));
    assert_eq!(antisym(&[]).status.code(), Some(2));
}

#[test]
fn numerical_rejection_exits_one() {
    // x₁ is not ℒₛ-finite, so the classical definition is refused.
    let field = r#"{"family":"Monomial_x1"}"#;
    let out = antisym(&["fraclap", "--field", field, "--point", "0.5", "--route", "classical"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(summary(&out)["error"].as_str().is_some());
}

#[test]
fn fraclap_of_x1_vanishes() {
    let field = r#"{"family":"Monomial_x1"}"#;
    let out = antisym(&["fraclap", "--field", field, "--point", "0.7", "--s", "0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let v = &summary(&out)["summary"];
    assert_eq!(v["route"], "antisymmetric");
    assert!(v["value"].as_f64().unwrap().abs() < 2e-5);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let csv = dir.path().join("rows.csv");
    let text = format!(
        r#"{{"command": "harnack_boundary", "params": {{"n": 1, "s": 0.5}}, "seeds": [1, 2],
            "output_path": {:?}, "format": "csv", "options": {{"grid_n": 16}}}}"#,
        csv.to_str().unwrap()
    );
    std::fs::write(&cfg, text).unwrap();
    let out = antisym(&["--config", cfg.to_str().unwrap(), "--seeds", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rows = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = rows.lines().collect();
    assert_eq!(lines[0], "seed,sup_q,inf_q,ratio,anorm,c_lower,c_upper");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("5,"));
}

#[test]
fn csv_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = antisym(&["barrier", "--grid-n", "8", "--output", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let (ra, rb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ra, rb);
    let text = String::from_utf8(ra).unwrap();
    assert!(text.starts_with("x1,value,error_bound,quotient\n"));
    for line in text.lines().skip(1) {
        for cell in line.split(',') {
            let x: f64 = cell.parse().unwrap();
            assert_eq!(format!("{x:?}"), cell);
        }
    }
}

#[test]
fn rows_embed_in_summary_without_output_path() {
    let out = antisym(&["psi", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = summary(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 52);
    assert!((rows[0]["psi"].as_f64().unwrap() - 2.0 / std::f64::consts::PI).abs() < 1e-6);
    assert!(v["summary"]["sandwich_ratio"].as_f64().unwrap() <= 50.0);
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_antisym"))
            .args(["harnack", "battery", "--seeds", "0,1,2", "--grid-n", "16"])
            .env("ANTISYM_THREADS", threads)
            .output()
            .unwrap()
    };
    let (one, two) = (run("1"), run("2"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, two.stdout);
    assert_eq!(run("many").status.code(), Some(2));
}
