use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_egdeg")).args(args).env("EGDEG_WORKERS", "1").output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn report(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn d3_strata_off_the_origin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"group": {"kind": "dihedral", "n": 3}, "domain": {"kind": "punctured_space"}}"#);
    let r = report(&["strata", cfg.to_str().unwrap()]);
    assert_eq!(r["schema"], "egdeg/1");
    let strata = r["strata"].as_array().unwrap();
    let counts: Vec<(String, usize, usize)> = strata
        .iter()
        .map(|s| {
            (
                s["orbit_type"].as_str().unwrap().to_string(),
                s["components"].as_array().unwrap().len(),
                s["quotients"].as_array().unwrap().len(),
            )
        })
        .collect();
    assert_eq!(counts, vec![("(Z2)".to_string(), 2, 2), ("(e)".to_string(), 6, 1)]);
}

#[test]
fn empty_domain_has_no_orbit_types() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"group": {"kind": "cyclic", "n": 4}, "domain": {"kind": "union", "items": []}}"#);
    let r = report(&["strata", cfg.to_str().unwrap()]);
    assert!(r["orbit_types"].as_array().unwrap().is_empty());
}

#[test]
fn non_invariant_domain_is_rejected_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"group": {"kind": "dihedral", "n": 3}, "domain": {"kind": "offset_ball", "center": [1, 0], "r": 0.5}}"#,
    );
    let out = run(&["strata", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "validation");
    assert!(err["message"].as_str().unwrap().contains('['));
}

#[test]
fn broken_configs_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for (i, body) in [
        r#"{"group": {"kind": "cyclic", "n": 3}, "colour": 1}"#,
        r#"{"group": {"kind": "cyclic", "n": 3}, "numerics": {"grid_h": -1}}"#,
        r#"{"schema": "egdeg/0", "group": {"kind": "cyclic", "n": 3}}"#,
        r#"{"potential": {"kind": "catalog", "name": "no_such_map"}}"#,
        r#"{"group": {"kind": "cyclic", "n": 3}, "potential": {"expr": "x1"}}"#,
        r#"not json"#,
    ]
    .iter()
    .enumerate()
    {
        let cfg = write(dir.path(), &format!("c{i}.json"), body);
        let out = run(&["theta", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{body}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn theta_of_catalog_maps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.json", r#"{"potential": {"kind": "catalog", "name": "z2_line_min"}}"#);
    let r = report(&["theta", cfg.to_str().unwrap()]);
    assert_eq!(r["theta11"], 1);
    let entries = r["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["orbit_type"], "(e)");
    assert_eq!(entries[0]["component"], "q0");
    assert_eq!(entries[0]["value"], 0);
    assert!(r["trace"]["steps"].is_array());

    let cfg = write(dir.path(), "b.json", r#"{"potential": {"kind": "catalog", "name": "d3_axis_orbit_normal"}}"#);
    let r = report(&["theta", cfg.to_str().unwrap()]);
    assert_eq!(r["theta11"], 0);
    let values: Vec<i64> = r["entries"].as_array().unwrap().iter().map(|e| e["value"].as_i64().unwrap()).collect();
    assert_eq!(values.iter().filter(|&&v| v != 0).collect::<Vec<_>>(), vec![&1]);
    assert_eq!(r["catalog"]["matches"], true);
}

#[test]
fn output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let body = |name: &str| {
        format!(
            r#"{{"group": {{"kind": "antipodal", "dim": 2}}, "domain": {{"kind": "punctured_space"}},
                "potential": {{"expr": "(x1^2-1)^2 + x2^2"}}, "numerics": {{"seed": 7}},
                "output": "{}"}}"#,
            dir.path().join(name).display()
        )
    };
    let a = write(dir.path(), "a.json", &body("a.out"));
    let b = write(dir.path(), "b.json", &body("b.out"));
    assert!(run(&["theta", a.to_str().unwrap()]).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_egdeg"))
        .args(["theta", b.to_str().unwrap()])
        .env("EGDEG_WORKERS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    let (x, y) = (std::fs::read(dir.path().join("a.out")).unwrap(), std::fs::read(dir.path().join("b.out")).unwrap());
    assert_eq!(x, y);
    let r: Value = serde_json::from_slice(&x).unwrap();
    assert_eq!(r["entries"][0]["value"], 1);
}

#[test]
fn degree_on_a_box() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"group": {"kind": "trivial", "dim": 2}, "potential": {"expr": "x1^2 - x2^2"}, "box": {"lo": [-1, -1], "hi": [1, 1]}}"#,
    );
    let r = report(&["degree", cfg.to_str().unwrap()]);
    assert_eq!(r["box"]["degree"], -1);
    assert_eq!(r["strata"][0]["quotients"][0]["value"], -1);
}

#[test]
fn zero_on_the_box_boundary_is_a_numerics_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"group": {"kind": "trivial", "dim": 1}, "potential": {"expr": "x1^2/2"}, "box": {"lo": [0], "hi": [1]}}"#,
    );
    let out = run(&["degree", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn perturb_trace_reports_the_first_layer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"potential": {"kind": "catalog", "name": "z2_line_max"}}"#);
    let r = report(&["perturb-trace", cfg.to_str().unwrap()]);
    let layer = &r["first_layer"];
    assert_eq!(layer["whole"], true);
    let eps = layer["eps"].as_f64().unwrap();
    assert!(eps > 0.0);
    let c = &layer["partition"]["c"];
    assert_eq!(c["violations"], 0);
    assert!(c["min_norm"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_partition_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("results.json");
    let out = run(&["verify", "--suite", "partition", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let r: Value = serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(r["schema"], "egdeg/1");
    assert_eq!(r["passed"], true);
    assert_eq!(r["criteria"][0]["id"], 9);
    assert!(r["criteria"][0]["notes"][0].as_str().unwrap().contains("C margin"));
}
