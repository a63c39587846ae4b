use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spinqa(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinqa"))
        .args(args)
        .current_dir(dir)
        .env_remove("SPINQA_CONFIG_DIR")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = spinqa(dir, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const PATH3: &str = "p mwis 3 2\nn 2 5\ne 1 2\ne 2 3\n";

#[test]
fn scenario_files() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["scenario", "--targets", "1", "--lambda-c", "5e-5", "--out", "one.json"]);
    ok(d.path(), &["scenario", "--targets", "2", "--lambda-c", "1e-5", "--out", "two.json"]);
    let one = json(&d.path().join("one.json"));
    assert_eq!(one["config"]["targets"].as_array().unwrap().len(), 1);
    assert_eq!(one["config"]["clutter_density"], 5e-5);
    assert_eq!(json(&d.path().join("two.json"))["truth"].as_array().unwrap().len(), 2);

    ok(d.path(), &["scenario", "--seed", "7", "--out", "a.json"]);
    ok(d.path(), &["scenario", "--seed", "7", "--out", "b.json"]);
    assert_eq!(std::fs::read(d.path().join("a.json")).unwrap(), std::fs::read(d.path().join("b.json")).unwrap());
    assert!(d.path().join("a.json.manifest.json").exists());
}

#[test]
fn usage_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        &["scenario", "--targets", "0"][..],
        &["scenario", "--pd", "1.5"],
        &["scenario", "--region", "1,2,3"],
        &["bogus"],
    ] {
        assert_eq!(spinqa(d.path(), args).status.code(), Some(2), "{args:?}");
    }
    std::fs::write(d.path().join("g.txt"), PATH3).unwrap();
    let o = spinqa(d.path(), &["sweep", "--graph", "g.txt", "--tf-grid", ""]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mwis_backends_agree_on_path3() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("g.txt"), PATH3).unwrap();
    ok(d.path(), &["mwis", "--graph", "g.txt", "--out", "exact.json"]);
    let exact = json(&d.path().join("exact.json"));
    assert_eq!(exact["set"], serde_json::json!([1]));
    assert_eq!(exact["weight"], 5.0);

    let out = ok(d.path(), &["--json", "mwis", "--graph", "g.txt", "--backend", "anneal", "--tf", "20", "--noise", "off", "--shots", "200", "--out", "qa.json"]);
    let summary: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(summary["summary"]["weight"], 5.0);
    assert_eq!(json(&d.path().join("qa.json"))["best_weight"], 5.0);

    ok(d.path(), &["mwis", "--graph", "g.txt", "--backend", "sqa", "--out", "sqa.json"]);
    assert_eq!(json(&d.path().join("sqa.json"))["best_weight"], 5.0);
}

#[test]
fn input_and_capacity_errors() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bad.txt"), "p mwis 3 1\nn 1 2\ne 1 7\n").unwrap();
    let o = spinqa(d.path(), &["mwis", "--graph", "bad.txt"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(spinqa(d.path(), &["mwis", "--graph", "missing.txt"]).status.code(), Some(3));

    let weights: Vec<String> = (0..17).map(|_| "1.0".into()).collect();
    let g = format!("{{\"n\": 17, \"weights\": [{}], \"edges\": []}}", weights.join(","));
    std::fs::write(d.path().join("big.json"), g).unwrap();
    let o = spinqa(d.path(), &["mwis", "--graph", "big.json", "--backend", "anneal"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sqa"));
}

#[test]
fn track_outputs_and_replay() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["scenario", "--targets", "1", "--lambda-c", "1e-5", "--out", "s.json"]);
    ok(d.path(), &["track", "--scenario", "s.json", "--out-dir", "run"]);
    let run = d.path().join("run");
    let report = json(&run.join("report.json"));
    assert_eq!(report["errors"][0]["fragments"], 1);
    let counts = std::fs::read_to_string(run.join("counts.csv")).unwrap();
    assert_eq!(counts.lines().next(), Some("scan,n_hypotheses,n_survivors,backend_time_model_s"));
    assert_eq!(counts.lines().count(), 21);
    let tracks = std::fs::read_to_string(run.join("tracks.csv")).unwrap();
    assert_eq!(tracks.lines().next(), Some("scan,track_id,x,y"));

    let before = std::fs::read(run.join("report.json")).unwrap();
    ok(d.path(), &["replay", "run/manifest.json", "--check"]);
    std::fs::remove_file(run.join("report.json")).unwrap();
    ok(d.path(), &["replay", "run/manifest.json"]);
    assert_eq!(std::fs::read(run.join("report.json")).unwrap(), before);

    ok(d.path(), &["track", "--scenario", "s.json", "--lambda-c", "5e-5", "--out-dir", "high"]);
    let high = json(&d.path().join("high/report.json"));
    assert!(high["errors"][0]["fragments"].as_u64() >= report["errors"][0]["fragments"].as_u64());
}

#[test]
fn single_step_runs_backend_once() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["scenario", "--targets", "2", "--out", "s.json"]);
    ok(d.path(), &["track", "--scenario", "s.json", "--backend", "exact", "--out-dir", "dry"]);
    let dry = json(&d.path().join("dry/report.json"));
    let counts: Vec<u64> = dry["counts"].as_array().unwrap().iter().map(|c| c["n_hypotheses"].as_u64().unwrap()).collect();
    let peak = counts.iter().position(|c| c == counts.iter().max().unwrap()).unwrap();

    ok(d.path(), &["track", "--scenario", "s.json", "--backend", "sqa", "--mode", "single-step", "--out-dir", "ss"]);
    let r = json(&d.path().join("ss/report.json"));
    assert_eq!(r["quantum_scans"], serde_json::json!([peak]));

    ok(d.path(), &["timing", "--from-report", "ss/report.json", "--histogram", "h.csv"]);
    let h = std::fs::read_to_string(d.path().join("h.csv")).unwrap();
    let total: u64 = h.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, counts.len() as u64);
}

#[test]
fn timing_estimates() {
    let d = tempfile::tempdir().unwrap();
    let v: Value = serde_json::from_str(&ok(d.path(), &["--json", "timing", "--reset", "active", "--parallel-readout", "--shots", "1000", "--anneal-us", "50"])).unwrap();
    let total = v["summary"]["report"]["total"].as_f64().unwrap();
    assert!((total - 0.0521).abs() < 1e-9, "{total}");
    let v: Value = serde_json::from_str(&ok(d.path(), &["--json", "timing", "--reset", "passive", "--shots", "1000"])).unwrap();
    let total = v["summary"]["report"]["total"].as_f64().unwrap();
    assert!((5.0..=5.2).contains(&total), "{total}");
    assert_eq!(v["summary"]["report"]["dominant"], "reset");
}

#[test]
fn config_dir_supplies_defaults() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("cfg");
    std::fs::create_dir(&cfg).unwrap();
    let model = serde_json::json!({
        "reset_mode": "passive", "t_reset_passive": 0.01, "t_readout_single": 1e-6,
        "t_single_qubit_op": 1e-7, "parallel_readout": true, "n_qubits": 10, "t_anneal": 5e-5, "shots": 100
    });
    std::fs::write(cfg.join("timing.json"), model.to_string()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_spinqa"))
        .args(["--json", "timing"])
        .current_dir(d.path())
        .env("SPINQA_CONFIG_DIR", &cfg)
        .output()
        .unwrap();
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let total = v["summary"]["report"]["total"].as_f64().unwrap();
    assert!((total - 100.0 * (0.01 + 5e-5 + 1e-6)).abs() < 1e-9);
}

#[test]
fn sweep_and_device_exports() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("g.txt"), PATH3).unwrap();
    ok(d.path(), &["sweep", "--graph", "g.txt", "--tf-grid", "2,20", "--shots", "200", "--out", "s.csv"]);
    let csv = std::fs::read_to_string(d.path().join("s.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "t_f,shots,success_probability,best_weight");
    assert_eq!(rows.len(), 3);
    let p: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(p[1] >= p[0] - 0.05, "{p:?}");

    ok(d.path(), &["device", "--qubits", "2", "--tf", "1", "--out", "traj.csv"]);
    let traj = std::fs::read_to_string(d.path().join("traj.csv")).unwrap();
    assert!(traj.lines().next().unwrap().starts_with("t,"));
    assert!(traj.lines().count() > 2);
}
