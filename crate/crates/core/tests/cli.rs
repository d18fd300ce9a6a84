use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use approx::assert_relative_eq;
use serde_json::Value;
use tempfile::TempDir;

const BASELINE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/baseline.json");

fn diamag(args: &[&str]) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_diamag"))
        .args(args)
        .status()
        .unwrap();
    status.code().unwrap()
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![
        cmd,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    diamag(&args)
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn baseline_with(dir: &TempDir, name: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut cfg: Value = serde_json::from_str(&fs::read_to_string(BASELINE).unwrap()).unwrap();
    edit(&mut cfg);
    let path = dir.path().join(name);
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{ \"scenario\": { \"z0\": \"490 um\", }").unwrap();
    let out = dir.path().join("out");
    assert_eq!(run("simulate", &cfg, &out, &[]), 2);
    assert!(!out.exists());

    let cfg = baseline_with(&dir, "units.json", |c| {
        c["scenario"]["z0"] = "490 furlongs".into()
    });
    assert_eq!(run("analytics", &cfg, &out, &[]), 2);
    assert!(!out.exists());
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(diamag(&["teleport"]), 2);
}

#[test]
fn sensitivity_is_deterministic_for_fixed_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = Path::new(BASELINE);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(
            run("sensitivity", cfg, out, &["--seed", "7", "--samples", "6"]),
            0
        );
    }
    let read = |d: &Path| fs::read(d.join("statistics.json")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(
        fs::read(a.join("samples.csv")).unwrap(),
        fs::read(b.join("samples.csv")).unwrap()
    );
    let stats = read_json(a.join("statistics.json"));
    assert_eq!(stats["monte_carlo"]["samples"].as_array().unwrap().len(), 6);
}

#[test]
fn simulate_writes_outputs_and_manifest() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sim");
    assert_eq!(run("simulate", Path::new(BASELINE), &out, &[]), 0);
    let report = read_json(out.join("report.json"));
    assert_relative_eq!(
        report["report"]["max_superposition"].as_f64().unwrap(),
        980e-6,
        max_relative = 0.02
    );
    assert!(report["report"]["closed"].as_bool().unwrap());
    let manifest = read_json(out.join("manifest.json"));
    assert_eq!(manifest["command"], "simulate");
    for f in manifest["files"].as_array().unwrap() {
        assert!(out.join(f.as_str().unwrap()).exists(), "{f}");
    }
    let left = fs::read_to_string(out.join("left.csv")).unwrap();
    assert!(left.starts_with("t,x,z,vx,vz\r\n"));
}

#[test]
fn wires_off_keeps_separation_constant() {
    let dir = TempDir::new().unwrap();
    let cfg = baseline_with(&dir, "free.json", |c| c["scenario"]["wires"] = false.into());
    let out = dir.path().join("free");
    assert_eq!(run("simulate", &cfg, &out, &[]), 0);
    let sup = fs::read_to_string(out.join("superposition.csv")).unwrap();
    let mut rows = 0;
    for line in sup.lines().skip(1) {
        let dx: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_relative_eq!(dx, 1e-6, max_relative = 1e-9);
        rows += 1;
    }
    assert!(rows > 100);
}

#[test]
fn design_is_idempotent() {
    let dir = TempDir::new().unwrap();
    let (first, second) = (dir.path().join("d1"), dir.path().join("d2"));
    assert_eq!(run("design", Path::new(BASELINE), &first, &[]), 0);
    assert_eq!(
        run("design", &first.join("resolved_config.json"), &second, &[]),
        0
    );
    let (a, b) = (
        read_json(first.join("design.json")),
        read_json(second.join("design.json")),
    );
    for key in ["i_split", "i_side"] {
        assert_relative_eq!(
            a[key].as_f64().unwrap(),
            b[key].as_f64().unwrap(),
            max_relative = 1e-9
        );
    }
    assert_relative_eq!(a["i_split"].as_f64().unwrap(), 6.04138, max_relative = 1e-3);
    assert_eq!(a["feasible"], true);
}

#[test]
fn tiny_impact_parameter_is_infeasible() {
    let dir = TempDir::new().unwrap();
    let cfg = baseline_with(&dir, "tiny.json", |c| {
        c["scenario"]["delta_x0"] = "0.1 um".into();
        c["scenario"]["side_current_bracket"] = serde_json::json!([0.01, 20.0]);
    });
    let out = dir.path().join("tiny");
    assert_eq!(run("design", &cfg, &out, &[]), 4);
    let design = read_json(out.join("design.json"));
    assert_eq!(design["feasible"], false);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn analytics_reports_kinematics() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("an");
    assert_eq!(run("analytics", Path::new(BASELINE), &out, &[]), 0);
    let a = read_json(out.join("analytics.json"));
    assert_relative_eq!(
        a["kinematics"]["fall_time"].as_f64().unwrap(),
        0.01,
        max_relative = 1e-12
    );
    assert_relative_eq!(
        a["kinematics"]["incident_velocity"].as_f64().unwrap(),
        0.098,
        max_relative = 1e-12
    );
    let curve = fs::read_to_string(out.join("nv_separation.csv")).unwrap();
    assert_eq!(curve.lines().count(), 502);
}
