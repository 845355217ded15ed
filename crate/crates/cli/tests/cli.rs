use assert_cmd::Command;
use predicates::prelude::*;
use std::fs;

fn nlscyl() -> Command {
    Command::cargo_bin("nlscyl").unwrap()
}

fn write_cfg(dir: &std::path::Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const SIM_CFG: &str = r#"{
  "grid": {"l_x": 6.283185307179586, "n_x": 32, "n_y": 4},
  "solver": {"dt": 0.01, "t_end": 0.2},
  "initial_data": {"kind": "random_band", "band_n": 2.0, "amplitude": 0.3},
  "output": {"diag_every": 5},
  "seed": 7
}"#;

#[test]
fn missing_config_flag_exits_2() {
    nlscyl()
        .arg("simulate")
        .assert()
        .code(2)
        .stderr(predicate::str::contains("--config"));
}

#[test]
fn missing_required_key_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "c.json", r#"{"grid": {"l_x": 6.28, "n_x": 32}}"#);
    nlscyl()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .assert()
        .code(2)
        .stderr(predicate::str::contains("n_y"));
}

#[test]
fn unknown_key_is_rejected_with_its_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "c.json",
        r#"{"grid": {"l_x": 6.28, "n_x": 32, "n_y": 4}, "sovler": {}}"#,
    );
    nlscyl()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .assert()
        .code(2)
        .stderr(predicate::str::contains("sovler"));
}

#[test]
fn same_seed_gives_byte_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "c.json", SIM_CFG);
    for run in ["a", "b"] {
        nlscyl()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(run))
            .assert()
            .success();
    }
    let a = fs::read(dir.path().join("a/diagnostics.csv")).unwrap();
    let b = fs::read(dir.path().join("b/diagnostics.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
    for stamp in ["resolved_config.json", "version.json", "checksums.json", "manifest.json"] {
        assert!(dir.path().join("a").join(stamp).is_file(), "missing {stamp}");
    }
}

#[test]
fn linear_only_keeps_the_sobolev_column_constant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "c.json",
        r#"{
          "grid": {"l_x": 6.283185307179586, "n_x": 32, "n_y": 4},
          "solver": {"dt": 0.01, "t_end": 0.3, "linear_only": true},
          "initial_data": {"kind": "random_band", "band_n": 2.0, "amplitude": 0.5},
          "output": {"diag_every": 10},
          "seed": 3
        }"#,
    );
    let out = dir.path().join("run");
    nlscyl()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .assert()
        .success();
    let text = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "hs_norm").unwrap();
    let values: Vec<f64> = lines
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect();
    assert!(values.len() >= 3);
    for v in &values {
        assert!((v - values[0]).abs() <= 1e-12 * values[0]);
    }
}

#[test]
fn invalid_variant_name_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "c.json",
        r#"{
          "grid": {"l_x": 6.283185307179586, "n_x": 64, "n_y": 8},
          "experiments": [{
            "experiment": {"variant": "separatoin", "n1": 4.0, "n2": 8.0, "m": 4.0},
            "axis": "m",
            "values": [2.0, 4.0]
          }]
        }"#,
    );
    nlscyl()
        .args(["verify-bilinear", "--config"])
        .arg(&cfg)
        .assert()
        .code(2)
        .stderr(predicate::str::contains("variant"));
}

#[test]
fn three_point_sweep_has_csv_but_no_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "c.json",
        r#"{
          "grid": {"l_x": 6.283185307179586, "n_x": 64, "n_y": 8},
          "experiments": [{
            "experiment": {"variant": "separation", "n1": 8.0, "n2": 8.0, "m": 2.0,
                            "t_window": 4.0, "trials": 2},
            "axis": "m",
            "values": [2.0, 4.0, 8.0]
          }],
          "seed": 5
        }"#,
    );
    let out = dir.path().join("run");
    nlscyl()
        .args(["verify-bilinear", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .assert()
        .success()
        .stderr(predicate::str::contains("at least 4"));
    let csv = fs::read_to_string(out.join("bilinear_0.csv")).unwrap();
    assert!(csv.lines().count() == 7, "expected 6 trial rows:\n{csv}");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("bilinear_0_summary.json")).unwrap())
            .unwrap();
    assert!(summary["norm_slope"].is_null());
    assert!(summary["fit_warning"].is_string());
    assert!(summary["c_max"].as_f64().unwrap() > 0.0);
}

#[test]
fn complexity_guard_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "c.json",
        r#"{
          "grid": {"l_x": 6.283185307179586, "n_x": 16, "n_y": 4},
          "multiplier": {"s": 1.5, "n": 2.0},
          "solver": {"dt": 0.01, "t_end": 0.1},
          "initial_data": {"kind": "random_band", "band_n": 2.0, "amplitude": 0.3},
          "energy_increment": {"n_values": [2.0], "quartic_mode": {"kind": "exact"}, "budget": 1},
          "seed": 1
        }"#,
    );
    nlscyl()
        .args(["energy-increment", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("run"))
        .assert()
        .code(4)
        .stderr(predicate::str::contains("complexity guard"));
}

#[test]
fn symbol_sample_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "c.json",
        r#"{
          "grid": {"l_x": 6.283185307179586, "n_x": 16, "n_y": 4},
          "multiplier": {"s": 1.5, "n": 8.0},
          "symbol_sample": {"regimes": ["dominant"], "samples": 5000, "radius": 24.0},
          "seed": 11
        }"#,
    );
    let out = dir.path().join("run");
    nlscyl()
        .args(["symbol-sample", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .assert()
        .success();
    let csv = fs::read_to_string(out.join("symbol_sample.csv")).unwrap();
    assert!(csv.starts_with("regime,lhs,rhs,ratio,seed"));
    assert!(csv.lines().count() > 10);
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(out.join("symbol_sample_summary.json")).unwrap(),
    )
    .unwrap();
    assert!(summary["regimes"][0]["max_ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn growth_study_and_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "c.json",
        r#"{
          "grid": {"l_x": 6.283185307179586, "n_x": 32, "n_y": 4},
          "multiplier": {"s": 1.5, "n": 8.0},
          "solver": {"dt": 0.01, "t_end": 0.5, "linear_only": true},
          "initial_data": {"kind": "random_band", "band_n": 2.0, "amplitude": 0.4},
          "output": {"diag_every": 5},
          "seed": 2
        }"#,
    );
    let out = dir.path().join("run");
    nlscyl()
        .args(["growth-study", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .assert()
        .success();
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("growth_summary.json")).unwrap())
            .unwrap();
    let slope = summary["exponent"]["slope"].as_f64().unwrap();
    assert!(slope.abs() < 1e-8, "free flow should not grow, slope {slope}");
    nlscyl()
        .args(["report", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .assert()
        .success();
    assert!(out.join("growth.svg").is_file());
    assert!(out.join("report.json").is_file());
}
