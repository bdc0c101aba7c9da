use std::path::Path;
use std::process::{Command, Output};

fn rass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rass"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, extra: serde_json::Value) -> String {
    let mut cfg = serde_json::json!({
        "kappa_minutes": 60,
        "horizon": 6,
        "storage": {"p_c_max": 2.0, "p_d_max": 2.0, "eta": 0.9, "e_min": 0.0, "e_max": 4.0},
        "synthetic": {"observations": 40, "sigma0": 2.0, "gamma": 0.5, "seed": 1},
        "beta_grid": [0.0, 0.3],
        "alpha_grid": [0.9],
        "n_scenarios": 8,
        "seed": 2
    });
    for (k, v) in extra.as_object().unwrap() {
        cfg[k] = v.clone();
    }
    let path = dir.join("config.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn missing_config_exits_2() {
    let out = rass(&["solve", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"horizon\": ").unwrap();
    let out = rass(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_storage_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        serde_json::json!({"storage": {"p_c_max": 2.0, "p_d_max": 2.0, "eta": 1.5, "e_min": 0.0, "e_max": 4.0}}),
    );
    let out = rass(&[
        "solve",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synth_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("syn");
    let out = rass(&[
        "synth",
        "--K",
        "12",
        "--kappa",
        "30",
        "--obs",
        "25",
        "--sigma0",
        "2",
        "--gamma",
        "0.5",
        "--seed",
        "7",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let pre = std::fs::read_to_string(out_dir.join("predispatch.csv")).unwrap();
    assert_eq!(pre.lines().count(), 13);
    let errors = std::fs::read_to_string(out_dir.join("errors.csv")).unwrap();
    assert_eq!(errors.lines().count(), 26);
    assert!(out_dir.join("realized.csv").exists());
}

#[test]
fn solve_with_export_writes_instances() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), serde_json::json!({}));
    let out_dir = dir.path().join("run");
    let out = rass(&[
        "solve",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--export",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "profit_table.csv",
        "summary.csv",
        "netdischarge.csv",
        "manifest.json",
    ] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let lps: Vec<_> = std::fs::read_dir(out_dir.join("instances"))
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "lp"))
        .collect();
    assert_eq!(lps.len(), 2);
}

#[test]
fn simulate_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), serde_json::json!({}));
    let out_dir = dir.path().join("sim");
    let out = rass(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out_dir.join("realized_table.csv").exists());
    assert_eq!(
        std::fs::read_dir(out_dir.join("traces")).unwrap().count(),
        2
    );
}
