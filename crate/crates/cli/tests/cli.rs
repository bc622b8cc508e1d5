use std::path::Path;
use std::process::{Command, Output};

fn spinres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinres"))
        .args(args)
        .env_remove("SPINRES_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn gr_xxt_rows() {
    let o = spinres(&["gr", "--alpha", "0.7", "--lambda", "1.0", "--r-max", "10"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("r,g,method\n"));
    assert!(!out.contains('\r'));
    assert_eq!(out.lines().count(), 22);
    let r = column(&out, "r");
    let g = column(&out, "g");
    let i = r.iter().position(|x| x == "1").unwrap();
    let g1: f64 = g[i].parse().unwrap();
    assert!((g1 - 0.380922238201).abs() < 1e-9);
    assert!(column(&out, "method").iter().all(|m| m == "analytic"));
}

#[test]
fn gr_ferromagnetic_is_trivial() {
    let o = spinres(&["gr", "--alpha", "0.2", "--lambda", "3.0", "--r-max", "3"]);
    assert!(o.status.success());
    let g = column(&stdout(&o), "g");
    let vals: Vec<f64> = g.iter().map(|s| s.parse().unwrap()).collect();
    assert!(vals.iter().filter(|v| v.abs() > 1e-12).count() == 1);
}

#[test]
fn quadrature_matches_analytic() {
    let a = spinres(&["gr", "--r-max", "5"]);
    let q = spinres(&["gr", "--r-max", "5", "--method", "quadrature"]);
    for (x, y) in column(&stdout(&a), "g").iter().zip(column(&stdout(&q), "g")) {
        let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn even_chain_length_is_config_error() {
    let o = spinres(&["gr", "--method", "finite", "--chain-length", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn analytic_outside_xxt_is_config_error() {
    let o = spinres(&["gr", "--gamma", "0.5", "--method", "analytic"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn single_step_axis_is_config_error() {
    let o = spinres(&["sweep", "--axis", "lambda", "--lo", "0", "--hi", "1", "--steps", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = spinres(&["sweep"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_config_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_spinres"))
        .args(["gr", "--r-max", "2"])
        .env("SPINRES_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ising_coherence_saturates() {
    let o = spinres(&["resource", "--gamma", "1", "--lambda", "0", "--alpha", "0", "--r-max", "5"]);
    assert!(o.status.success());
    for v in column(&stdout(&o), "value") {
        assert!((v.parse::<f64>().unwrap() - 1.0).abs() < 1e-9, "{v}");
    }
}

#[test]
fn discord_reports_measurement() {
    let o = spinres(&["resource", "--resource", "discord", "--r-max", "3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("r,value,measure,measurement\n"));
    assert_eq!(out.lines().count(), 4);
}

#[test]
fn sweep_is_deterministic() {
    let args = [
        "sweep", "--axis", "alpha,lambda", "--lo", "-2,-3", "--hi", "2,3", "--steps", "5,5", "--r-max", "4",
    ];
    let a = Command::new(env!("CARGO_BIN_EXE_spinres")).args(args).env("SPINRES_THREADS", "1").output().unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_spinres")).args(args).env("SPINRES_THREADS", "4").output().unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert_eq!(out.lines().count(), 1 + 25 * 4);
    assert!(out.starts_with("alpha,lambda,r,value\n"));
}

#[test]
fn sweep_marks_failed_points_empty() {
    // alpha = 1, lambda = 2 is gapless: the analytic form is undefined there
    let o = spinres(&["sweep", "--axis", "lambda", "--lo", "0", "--hi", "2", "--steps", "2", "--alpha", "1", "--r-max", "2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "2,1,"), "{out}");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"alpha": 0.2, "lambda": 3.0, "r_max": 2, "format": "json"}"#).unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = spinres(&["gr", "--config", cfg]);
    assert!(from_file.status.success());
    let v: serde_json::Value = serde_json::from_slice(&from_file.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 5);

    let over = spinres(&["gr", "--config", cfg, "--alpha", "0.7", "--lambda", "1", "--format", "csv"]);
    let out = stdout(&over);
    assert!(out.contains("1,0.380922238201,analytic"), "{out}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"alhpa": 0.2}"#).unwrap();
    let o = spinres(&["gr", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_file_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    let o = spinres(&["gr", "--r-max", "2", "--output", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(Path::new(&path)).unwrap();
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn diagnose_extended_model() {
    let o = spinres(&["diagnose", "--gamma", "1", "--lambda", "0.5", "--alpha", "2.5", "--delta", "0.3", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["winding"]["n"], 2);
    assert_eq!(v["consistent"], true);
}

#[test]
fn diagnose_xxt_reports_fermi_points() {
    let o = spinres(&["diagnose", "--alpha", "0.7", "--lambda", "1", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["phase_region"], "SL-I");
    assert_eq!(v["fermi_points"].as_array().unwrap().len(), 1);
}

#[test]
fn gapless_winding_is_numerical_error() {
    let o = spinres(&["winding", "--gamma", "1", "--lambda", "1", "--alpha", "0", "--delta", "0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn winding_scan_lists_critical_points() {
    let o = spinres(&[
        "winding", "--gamma", "1", "--lambda", "0.5", "--delta", "0.3", "--axis", "alpha", "--lo", "-3", "--hi", "3",
        "--steps", "7", "--format", "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 7);
    assert!(!v["critical_points"].as_array().unwrap().is_empty());
}

#[test]
fn validate_passes_by_default() {
    let o = spinres(&["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().skip(1).all(|l| !l.ends_with(",fail")));
}

#[test]
fn validate_zero_tolerance_fails() {
    let o = spinres(&["validate", "--chain-length", "9", "--tol", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(",fail"));
}

#[test]
fn validate_rejects_oversized_chain() {
    let o = spinres(&["validate", "--chain-length", "15"]);
    assert_eq!(o.status.code(), Some(2));
}
