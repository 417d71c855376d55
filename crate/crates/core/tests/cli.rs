use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn lapinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lapinv")).args(args).output().unwrap()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).to_string_lossy().into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p: PathBuf = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn hit_on_single_edge() {
    let o = lapinv(&["hit", "--graph", &fixture("edge.txt"), "--u", "0", "--v", "1", "--eps", "1e-3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    for key in ["eps_requested", "eps_internal", "delta_chain", "f", "k", "metrics"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn solve_json_report() {
    let o = lapinv(&[
        "solve", "--graph", &fixture("triangle.txt"), "--b", &fixture("triangle_b.txt"), "--eps", "1e-4", "--report", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let x: Vec<f64> = v["x"].as_array().unwrap().iter().map(|a| a.as_f64().unwrap()).collect();
    // L⁺b for the triangle is b/3
    for (xi, bi) in x.iter().zip([1.0, -0.5, -0.5]) {
        assert!((xi - bi / 3.0).abs() < 1e-4);
    }
    let want = (1e-4f64 / (4.0 * 16.0 * 9.0)).powi(2) / 2.0;
    assert_eq!(v["eps_internal"].as_f64().unwrap(), want);
    assert_eq!(v["f"].as_u64(), Some(4));
}

#[test]
fn plain_outputs_and_escape() {
    let o = lapinv(&["escape", "--graph", &fixture("path3.txt"), "--u", "0", "--v", "2", "--report", "plain"]);
    assert_eq!(stdout(&o), "1.0\n0.5\n0.0\n");
    let o = lapinv(&["pinv", "--graph", &fixture("triangle.txt"), "--report", "plain", "--entry", "0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let fields: Vec<String> = stdout(&o).split_whitespace().map(String::from).collect();
    assert_eq!(&fields[..2], ["0", "0"]);
    assert!((fields[2].parse::<f64>().unwrap() - 2.0 / 9.0).abs() < 1e-3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "0 1\n1 two\n");
    let o = lapinv(&["pinv", "--graph", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2, column 3"));

    let b = write(dir.path(), "b.txt", "1\n0\n0\n");
    let o = lapinv(&["solve", "--graph", &fixture("triangle.txt"), "--b", &b]);
    assert_eq!(o.status.code(), Some(2));
    let o = lapinv(&["solve", "--graph", &fixture("triangle.txt"), "--b", &b, "--project"]);
    assert_eq!(o.status.code(), Some(0));

    let short = write(dir.path(), "short.txt", "1\n-1\n");
    assert_eq!(lapinv(&["solve", "--graph", &fixture("triangle.txt"), "--b", &short]).status.code(), Some(1));

    let split = write(dir.path(), "split.txt", "0 1\n2 3\n");
    assert_eq!(lapinv(&["pinv", "--graph", &split]).status.code(), Some(2));
    assert_eq!(lapinv(&["pinv", "--graph", &split, "--auto-split"]).status.code(), Some(0));
    assert_eq!(lapinv(&["hit", "--graph", &split, "--u", "0", "--v", "3"]).status.code(), Some(2));

    assert_eq!(lapinv(&["pinv", "--graph", "/nonexistent/graph.txt"]).status.code(), Some(1));
    assert_eq!(lapinv(&["pinv", "--graph", &split, "--eps", "-1"]).status.code(), Some(1));
    assert_eq!(lapinv(&["pinv", "--graph", &split, "--mu", "0.1"]).status.code(), Some(1));
    assert_eq!(lapinv(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(lapinv(&["--help"]).status.code(), Some(0));
}

#[test]
fn expander_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec.json");
    let o = lapinv(&["expander", "--t", "6", "--mu", "0.25", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let first = std::fs::read_to_string(&out).unwrap();
    let v: Value = serde_json::from_str(&first).unwrap();
    assert!(v["verified_bias"].as_f64().unwrap() <= 0.25);
    assert!(v["generators"][0].as_str().unwrap().starts_with("0x"));
    let o = lapinv(&["expander", "--spec", out.to_str().unwrap()]);
    assert_eq!(stdout(&o), first);

    let tampered = first.replacen("\"c\": ", "\"c\": 1", 1);
    let bad = write(dir.path(), "bad.json", &tampered);
    assert_eq!(lapinv(&["expander", "--spec", &bad]).status.code(), Some(1));
}

#[test]
fn dsquare_stats_reports_levels() {
    let o = lapinv(&[
        "dsquare-stats", "--graph", &fixture("triangle.txt"), "--chain", "derandomized", "--per-level", "--mu", "0.25", "--k", "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let levels = v["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 3);
    assert_eq!(levels[2]["degree"].as_u64(), Some(256));
    assert!(levels[2]["lambda_measured"].as_f64().unwrap() <= levels[2]["lambda_bound"].as_f64().unwrap() + 1e-12);
}

#[test]
fn verify_and_determinism() {
    let o = lapinv(&["verify", "--instances", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], Value::Bool(true));
    assert_eq!(stdout(&lapinv(&["verify", "--instances", "10"])), stdout(&o));

    let args = ["solve", "--graph", &fixture("triangle.txt"), "--b", &fixture("triangle_b.txt"), "--backend", "entrywise", "--k", "3"];
    let a = lapinv(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, lapinv(&args).stdout);
}
