//! Runs the `qinfer` binary end to end.

use std::path::PathBuf;
use std::process::{Command, Output};

fn qinfer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qinfer")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qinfer-it-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn fisher_summary_line() {
    let o = qinfer(&["fisher", "--model", "great-circle", "--theta", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), r#"{"I":1.0,"i":1.0,"attained":true}"#);
}

#[test]
fn bell_table_csv() {
    let dir = scratch("bell");
    let out = dir.join("bell.csv");
    let o = qinfer(&["bell", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(r#""p_equal":[1.0,0.25,0.25,0.25]"#));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next(), Some("setting,p_equal_quantum,lhv_bound_satisfiable"));
    assert_eq!(csv.lines().count(), 5);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(qinfer(&["teleport"]).status.code(), Some(2));
    assert_eq!(qinfer(&["fisher", "--model", "nonsense"]).status.code(), Some(2));
    assert_eq!(qinfer(&["tomo", "estimate", "--input", "/nonexistent/samples.csv"]).status.code(), Some(2));
    let o = qinfer(&["teleport", "--seed", "1", "--alpha", "1", "--beta", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("epr:"));
    assert_eq!(qinfer(&["--help"]).status.code(), Some(0));
}

#[test]
fn tomography_round_trip_is_deterministic() {
    let dir = scratch("tomo");
    let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
    for p in [&a, &b] {
        let o = qinfer(&["tomo", "simulate", "--state", "vacuum", "--n", "100000", "--seed", "7", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let est = dir.join("est.json");
    let o = qinfer(&[
        "tomo", "estimate", "--input", a.to_str().unwrap(), "--method", "mle", "--nmax", "4", "--state", "vacuum",
        "--out", est.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(summary["fidelity"].as_f64().unwrap() >= 0.98, "{summary}");
    let artifact: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&est).unwrap()).unwrap();
    assert_eq!(artifact["n_max"], 4);
    assert_eq!(artifact["rho"]["dim"], 5);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn config_file_supplies_flags() {
    let dir = scratch("cfg");
    let cfg = dir.join("run.json");
    std::fs::write(&cfg, r#"{"seed": 11, "alpha": "0.6", "beta": "0+0.8i"}"#).unwrap();
    let a = qinfer(&["teleport", "--config", cfg.to_str().unwrap()]);
    let b = qinfer(&["teleport", "--seed", "11", "--alpha", "0.6", "--beta", "0+0.8i"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn every_subcommand_runs() {
    let runs: [&[&str]; 9] = [
        &["bounds", "--seed", "1", "--povms", "20"],
        &["adaptive", "--seed", "1", "--n", "1000", "--reps", "20"],
        &["model", "--theta", "0.4"],
        &["instrument"],
        &["traj", "--seed", "2", "--t-max", "1"],
        &["traj", "--seed", "2", "--t-max", "1", "--n-traj", "50", "--unraveling", "diffusion"],
        &["teleport", "--seed", "3"],
        &["decohere", "--seed", "4"],
        &["fisher", "--model", "bloch", "--theta", "1.0,0.5"],
    ];
    for args in runs {
        let o = qinfer(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let line = stdout(&o);
        assert_eq!(line.lines().count(), 1);
        serde_json::from_str::<serde_json::Value>(&line).unwrap();
    }
}
