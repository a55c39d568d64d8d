use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_logistic-steady"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env("LOGISTIC_STEADY_SEED", "7").output().expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn verify_appendix_oracle_exits_zero_with_residual_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", config("appendix_oracle.json").to_str().unwrap(), "--variant", "verify", "--out-dir", out.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("observed order"));
    let report = json(&out.join("report.json"));
    assert!(report["scalars"]["residual"].as_f64().unwrap() <= 5e-4);
    assert!(out.join("oracle.csv").exists());
}

#[test]
fn main_plateau_at_zero_harvest_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", config("main_n3.json").to_str().unwrap(), "--variant", "main", "--mu", "0", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["exit_code"], 0);
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["eigen"]["lambda_star"].as_f64().map(|v| v > 0.0), Some(true));
    let outputs = manifest["outputs"].as_array().unwrap();
    let names: Vec<&str> = outputs.iter().map(|e| e["path"].as_str().unwrap()).collect();
    for expected in ["grid.csv", "ladder.csv", "report.json", "solution.csv"] {
        assert!(names.contains(&expected), "{names:?}");
    }
    let csv = fs::read_to_string(out.join("solution.csv")).unwrap();
    assert!(csv.starts_with("r,u,ld,subsolution,envelope\n"));
    assert!(out.join("timings.json").exists());
}

#[test]
fn trace_flag_writes_convergence_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", config("fast_growth.json").to_str().unwrap(), "--trace", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = fs::read_to_string(out.join("traces/rung_00.csv")).unwrap();
    assert!(csv.starts_with("iteration,energy_change,projected_gradient,step,bb_scale,binding\n"));
    assert!(csv.lines().count() > 2);
    let names: Vec<String> = json(&out.join("manifest.json"))["outputs"].as_array().unwrap().iter().map(|e| e["path"].as_str().unwrap().to_string()).collect();
    assert!(names.contains(&"traces/rung_00.csv".to_string()), "{names:?}");
}

#[test]
fn malformed_config_exits_two_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{ \"problem\": { \"family\": \"main-plateau\" ");
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_family_and_missing_file_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{ "problem": { "family": "nonesuch" } }"#);
    let out = dir.path().join("out");
    assert_eq!(run(&["solve", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["eigen", "--config", missing.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn inapplicable_variant_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", config("appendix_oracle.json").to_str().unwrap(), "--variant", "main", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn constant_weight_on_whole_space_exits_three_naming_the_hypothesis() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
  "problem": {
    "family": "custom",
    "domain": { "kind": "whole-space", "r_infinity": 100.0 },
    "spec": {
      "dim": 3, "lambda": 5.0, "mu": 0.0,
      "a": { "type": "constant", "value": 1.0 },
      "b": { "type": "step", "start": 3.0, "width": 1.0 },
      "h": { "type": "gaussian", "amplitude": 1.0, "center": 0.0, "width": 1.0 },
      "g": { "type": "power", "exponent": 4.0 },
      "beta": 3.0, "q": 3.0, "s": 6.0,
      "zero_set": { "kind": "closed-ball", "radius": 3.0 }
    }
  },
  "grid": { "intervals": 200 }
}"#,
    );
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert_eq!(o.status.code(), Some(3), "{stderr}");
    assert!(stderr.contains("hypothesis"), "{stderr}");
    assert!(!out.exists());
}

#[test]
fn lambda_outside_window_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{ "problem": { "family": "main-plateau" }, "lambda": { "value": 0.5 }, "grid": { "intervals": 300 } }"#);
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn eigen_of_unit_ball_and_infinite_lambda_star() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["eigen", "--config", config("unit_ball_eigen.json").to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let e = json(&out.join("eigen.json"));
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((e["lambda_1"]["richardson"].as_f64().unwrap() - pi2).abs() < 1e-4);
    assert_eq!(e["lambda_star"]["value"], "inf");
    assert_eq!(e["window"]["upper_margin"], "inf");
}

#[test]
fn eigen_at_lambda_one_has_zero_margin_outside_window() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let first = run(&["eigen", "--config", config("unit_ball_eigen.json").to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(first.status.code(), Some(0));
    let l1 = json(&out.join("eigen.json"))["lambda_1"]["value"].as_f64().unwrap();
    let out2 = dir.path().join("out2");
    let o = run(&[
        "eigen",
        "--config",
        config("unit_ball_eigen.json").to_str().unwrap(),
        "--lambda",
        &format!("{l1:e}"),
        "--out-dir",
        out2.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let w = &json(&out2.join("eigen.json"))["window"];
    assert_eq!(w["lower_margin"].as_f64(), Some(0.0));
    assert_eq!(w["inside"], false);
}

#[test]
fn sweep_with_zero_mu_max_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "sweep",
        "--config",
        config("main_n3.json").to_str().unwrap(),
        "--mu-max",
        "0",
        "--grid-nodes",
        "300",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("0.0,true"));
}

#[test]
fn sweep_success_pattern_is_a_prefix_consistent_with_bisection() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "sweep",
        "--config",
        config("main_n3.json").to_str().unwrap(),
        "--mu-max",
        "1.2",
        "--steps",
        "16",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let mut rdr = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    let success: Vec<bool> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(success.len(), 17);
    let first_fail = success.iter().position(|s| !s).unwrap_or(success.len());
    assert!(success[first_fail..].iter().all(|s| !s));
    assert!(first_fail > 0 && first_fail < success.len(), "{success:?}");
    let t = json(&out.join("threshold.json"));
    assert_eq!(t["success_prefix"], true);
    assert_eq!(t["consistent"], true);
    assert!(t["mu_0"].as_f64().unwrap() > 0.0);
    let points = fs::read_dir(out.join("points")).unwrap().count();
    assert_eq!(points, 17);
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("bounded_po.json");
    let mut digests = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--threads", "2", "--out-dir", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap())
            .filter(|e| e.file_name() != "timings.json")
            .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
            .collect();
        files.sort();
        digests.push(files);
    }
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn manifest_inventory_hashes_match_files() {
    use sha2::{Digest, Sha256};
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", config("fast_growth.json").to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let m = json(&out.join("manifest.json"));
    for e in m["outputs"].as_array().unwrap() {
        let bytes = fs::read(out.join(e["path"].as_str().unwrap())).unwrap();
        assert_eq!(hex::encode(Sha256::digest(&bytes)), e["sha256"].as_str().unwrap());
    }
    assert_eq!(m["variant"], "fast-growth");
    assert!(m["scalars"]["mu_3"].as_f64().unwrap() > 0.0);
}
