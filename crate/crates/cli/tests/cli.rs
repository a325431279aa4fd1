use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const IMAGINARY: &str = r#"{"family":"bernoulli","a":[0,1,0,0],"c0":1,"n":3}"#;
const REAL: &str = r#"{"family":"bernoulli","a":[1,0,0,0],"c0":1,"n":3}"#;

fn quatdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quatdyn")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn simulate_writes_integral_columns() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bernoulli.json");
    fs::write(&spec, IMAGINARY).unwrap();
    let out = dir.path().join("run");
    let o = quatdyn(&[
        "simulate",
        "--spec",
        spec.to_str().unwrap(),
        "--t",
        "0:20",
        "--integrals",
        "Hn,F_cyl",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_csv(&out.join("trajectory.csv"));
    assert_eq!(rows[0], ["t", "q0", "q1", "q2", "q3", "Hn", "F_cyl"]);
    assert!(rows.len() > 10);
    assert!(rows.iter().all(|r| r.len() == 7));
    // both columns are conserved on this spec
    let col = |k: usize| rows[1..].iter().map(|r| r[k].parse::<f64>().unwrap()).collect::<Vec<_>>();
    for k in [5, 6] {
        let v = col(k);
        let drift = v.iter().map(|x| (x - v[0]).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-8 * (1.0 + v[0].abs()), "column {k} drifts by {drift:e}");
    }
    assert_eq!(read_csv(&out.join("events.csv")).len(), 1);
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("simulate.json")).unwrap()).unwrap();
    assert_eq!(summary["result"]["termination"], "completed");
    assert_eq!(summary["config"]["options"]["rtol"], 1e-10);
}

#[test]
fn unknown_integral_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = quatdyn(&["simulate", "--spec", IMAGINARY, "--integrals", "Hn,Nope", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("Nope"));
}

#[test]
fn missing_spec_file_is_a_config_error() {
    let o = quatdyn(&["verify", "--spec", "/nonexistent/spec.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn escape_ray_ends_with_escape_record() {
    let dir = tempfile::tempdir().unwrap();
    // q1 axis is an escape ray for a = 1, c0 = 1, n = 3
    let o = quatdyn(&["simulate", "--spec", REAL, "--q0", "0,2,0,0", "--t", "0:5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let events = read_csv(&dir.path().join("events.csv"));
    let last = events.last().unwrap();
    assert_eq!(last[1], "ESCAPE");
    assert!(last[0].parse::<f64>().unwrap() < 5.0);
}

#[test]
fn verify_is_deterministic_and_passes() {
    let a = quatdyn(&["verify", "--spec", IMAGINARY, "--points", "200", "--seed", "3"]);
    let b = quatdyn(&["verify", "--spec", IMAGINARY, "--points", "200", "--seed", "3"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let v = stdout_json(&a);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["config"]["points"], 200);
    assert_eq!(v["result"]["pass"], true);
    let names: Vec<&str> = v["result"]["identities"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"{Hn, F_cyl}"));
}

#[test]
fn verify_wrong_regime_exits_2() {
    let o = quatdyn(&["verify", "--spec", r#"{"family":"homogeneous","a":[1,0,0,0],"n":3}"#]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("wrong regime"));
}

#[test]
fn rotation_reports_integral() {
    let o = quatdyn(&["rotation", "--spec", IMAGINARY, "--f", "1", "--h", "-1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = &stdout_json(&o)["result"];
    let i = r["I"].as_f64().unwrap();
    assert!(i < 0.0 && i > -1.0);
    assert!(r["abs_err"].as_f64().unwrap() < 1e-10);
}

#[test]
fn rotation_grid_is_monotone() {
    let o = quatdyn(&["rotation", "--spec", IMAGINARY, "--f", "1", "--grid", "6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = stdout_json(&o)["result"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 6);
    let is: Vec<f64> = rows.iter().map(|r| r["I"].as_f64().unwrap()).collect();
    assert!(is.windows(2).all(|w| w[1] < w[0]), "{is:?}");
}

#[test]
fn cubic_gate_is_a_config_error() {
    let o = quatdyn(&["rotation", "--spec", r#"{"family":"cubic","a":[0,1,0,0],"c0":1}"#, "--f", "1", "--h", "1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("domain violation"));
}

#[test]
fn spectrum_matches_eigensolver() {
    let o = quatdyn(&["spectrum", "--family", "esu1", "--a", "0,1,0,0", "--b", "0,0,1,0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = &stdout_json(&o)["result"];
    assert!(r["max_deviation"].as_f64().unwrap() < 1e-10);
}

#[test]
fn search_one_third_has_no_bracket() {
    let o = quatdyn(&["search", "--f", "1", "--target", "1/3"]);
    assert_eq!(code(&o), 5);
    assert!(stderr(&o).contains("no bracket"));
}

#[test]
fn search_negative_target_converges() {
    let o = quatdyn(&["search", "--f", "1", "--target", "-2/3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    assert!(v["result"]["residual"].as_f64().unwrap() < 1e-11);
    assert_eq!(v["config"]["target"], "-2/3");
}

#[test]
fn classify_dispatches_on_case() {
    let o = quatdyn(&["classify", "--spec", REAL, "--samples", "4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    assert_eq!(v["result"]["case"], "bernoulli_real_a");
    assert_eq!(v["result"]["report"]["ok"], true);

    let cubic = r#"{"family":"cubic","a":[0,1,0,0],"c0":1}"#;
    assert_eq!(code(&quatdyn(&["classify", "--spec", cubic])), 2);
}

#[test]
fn repro_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = quatdyn(&["repro", "--criteria", "1,8", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = fs::read_to_string(dir.path().join("summary.md")).unwrap();
    assert!(table.contains("| 1 | quaternion algebra | PASS"));
    assert!(table.contains("| 8 | linear spectra | PASS"));
    assert_eq!(code(&quatdyn(&["repro", "--criteria", "12"])), 2);
}

#[test]
fn thread_cap_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_quatdyn"))
        .args(["spectrum", "--family", "esu1", "--a", "0,1,0,0", "--b", "0,0,1,0"])
        .env("QUATDYN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
