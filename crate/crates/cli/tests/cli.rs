use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qdiff-cli-test-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn qdiff(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdiff")).args(args).arg("--out").arg(out).output().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn degrees_of_order_three() {
    let dir = scratch("degrees");
    let o = qdiff(&["degrees", "--n", "3"], &dir);
    assert!(o.status.success(), "{o:?}");
    let r = read_json(&dir.join("result.json"));
    let counts = &r["result"]["counts"];
    assert_eq!(counts, &serde_json::json!({"0": 1, "2": 3, "3": 2}));
    let csv = fs::read_to_string(dir.join("degrees.csv")).unwrap();
    assert_eq!(csv, "degree,count\n0,1\n2,3\n3,2\n");
}

#[test]
fn worked_example_classification() {
    let dir = scratch("perm");
    let o = qdiff(&["perm", "--pi", "1 2 7 6 5 3 4 8"], &dir);
    assert!(o.status.success(), "{o:?}");
    let r = &read_json(&dir.join("result.json"))["result"];
    assert_eq!(r["peaks"], serde_json::json!([3]));
    assert_eq!(r["valleys"], serde_json::json!([7]));
    assert_eq!(r["slopes"], serde_json::json!([5, 8]));
    assert_eq!(r["ladders"], serde_json::json!([1, 2, 4, 6]));
    assert_eq!(r["degree"], 4);
    let rows = r["matrix"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[3], serde_json::json!([0, 0, 1, 0, 0, -1, 1, 0, 0]));
}

#[test]
fn clt_variance_near_one() {
    let dir = scratch("clt");
    let o = qdiff(&["clt", "--T", "1", "--eps", "1e-4"], &dir);
    assert!(o.status.success(), "{o:?}");
    let r = &read_json(&dir.join("result.json"))["result"];
    let v = r["variance"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 0.05, "variance {v}");
    assert!(r["ks_distance"].as_f64().unwrap() < 0.02);
}

#[test]
fn reruns_are_byte_identical() {
    let a = scratch("det-a");
    let b = scratch("det-b");
    let args = ["boltzmann", "--samples", "2000", "--t", "3", "--seed", "7"];
    assert!(qdiff(&args, &a).status.success());
    assert!(qdiff(&args, &b).status.success());
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 4);
    for n in names {
        // the manifest names the output directory nowhere, so it must match too
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn flags_override_config_and_both_are_recorded() {
    let dir = scratch("precedence");
    let cfg = dir.join("cfg.json");
    fs::write(&cfg, r#"{"n": 4, "seed": 1}"#).unwrap();
    let out = dir.join("run");
    let o = qdiff(&["matrix", "--config", cfg.to_str().unwrap(), "--pi", "2 1", "--seed", "9"], &out);
    let bad = qdiff(&["degrees", "--config", cfg.to_str().unwrap()], &dir.join("deg"));
    // `seed` is not a parameter of `degrees`
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(o.status.code(), Some(2), "matrix has no parameter n");
    fs::write(&cfg, r#"{"pi": "3 2 1", "seed": 1}"#).unwrap();
    let o = qdiff(&["matrix", "--config", cfg.to_str().unwrap(), "--seed", "9"], &out);
    assert!(o.status.success(), "{o:?}");
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["config_file"]["seed"], 1);
    assert_eq!(m["cli_overrides"]["seed"], 9);
    assert_eq!(m["effective_config"]["seed"], 9);
    assert_eq!(m["effective_config"]["pi"], "3 2 1");
    assert_eq!(m["seed"], 9);
    let artifacts: Vec<&str> = m["artifacts"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    for a in artifacts {
        assert!(out.join(a).exists(), "{a}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = scratch("usage");
    assert_eq!(qdiff(&["degrees", "--bogus", "1"], &dir).status.code(), Some(2));
    assert_eq!(qdiff(&["perm", "--pi", "1 1 2"], &dir).status.code(), Some(2));
    assert_eq!(qdiff(&["degrees", "--samples", "4"], &dir).status.code(), Some(2));
    let cfg = dir.join("broken.json");
    fs::write(&cfg, "{\"n\": 4").unwrap();
    let o = qdiff(&["degrees", "--config", cfg.to_str().unwrap()], &dir);
    assert_eq!(o.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(report["error"], "usage");
}

#[test]
fn budget_overrun_exits_with_three() {
    let dir = scratch("budget");
    let o = qdiff(&["low-order", "--budget-seconds", "0.05"], &dir);
    assert_eq!(o.status.code(), Some(3));
    let report = read_json(&dir.join("error.json"));
    assert_eq!(report["error"], "budget_exceeded");
}

#[test]
fn wigner_writes_arrays_with_sidecars() {
    let dir = scratch("wigner");
    let o = qdiff(&["wigner", "--side", "16"], &dir);
    assert!(o.status.success(), "{o:?}");
    let meta = read_json(&dir.join("wigner.bin.json"));
    let len = meta["len"].as_u64().unwrap();
    assert_eq!(len, 32 * 32);
    assert_eq!(fs::metadata(dir.join("wigner.bin")).unwrap().len(), 8 * len);
    let r = &read_json(&dir.join("result.json"))["result"];
    assert!(r["position_marginal_error"].as_f64().unwrap() < 1e-12);
}

#[test]
fn duhamel_identity_holds() {
    let dir = scratch("duhamel");
    let o = qdiff(&["duhamel", "--terms", "3", "--side", "8"], &dir);
    assert!(o.status.success(), "{o:?}");
    let r = &read_json(&dir.join("result.json"))["result"];
    assert!(r["residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(r["unitarity_bound"]["holds"], true);
}
