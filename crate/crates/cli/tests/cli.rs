use std::process::{Command, Output};

fn extphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_extphase"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn geodesic_run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("nested/run.csv");
    let out = extphase(&[
        "geodesic",
        "--orbits",
        "1",
        "--h",
        "0.02P",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_json(&out);
    assert_eq!(summary["evaluations"], 400);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().next().unwrap().starts_with("step,tau,t,"));
    assert!(csv.with_extension("json").exists());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"h": 0.05, "t-end": 1, "method": "method2"}"#).unwrap();
    let out = extphase(&["vdp", "--config", cfg.to_str().unwrap(), "--no-compare"]);
    assert_eq!(out.status.code(), Some(0));
    let s = stdout_json(&out);
    assert_eq!(s["n_steps"], 20);
    assert_eq!(s["config"]["method"], "method2");

    let out = extphase(&["vdp", "--config", cfg.to_str().unwrap(), "--h", "0.1", "--no-compare"]);
    assert_eq!(stdout_json(&out)["n_steps"], 10);
}

#[test]
fn configuration_errors_exit_3() {
    assert_eq!(extphase(&["vdp", "--method", "bogus"]).status.code(), Some(3));
    assert_eq!(extphase(&["geodesic", "--problem", "vdp"]).status.code(), Some(3));
    assert_eq!(extphase(&["geodesic", "--frobnicate"]).status.code(), Some(3));
    assert_eq!(extphase(&["--help"]).status.code(), Some(0));
}

#[test]
fn divergence_exits_2() {
    let out = extphase(&["geodesic", "--h", "2P", "--orbits", "50", "--no-compare"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn converge_reports_second_order() {
    let out = extphase(&[
        "converge",
        "--problem",
        "harmonic",
        "--t-end",
        "1",
        "--hs",
        "0.1,0.05,0.025,0.0125",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let slope = stdout_json(&out)["report"]["slope"].as_f64().unwrap();
    assert!((slope - 2.0).abs() < 0.1, "{slope}");
}
