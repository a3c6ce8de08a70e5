use std::path::Path;

use repcap::cli::{run_with, EXIT_COMPUTATION, EXIT_OK, EXIT_USAGE, OUT_DIR_ENV};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("repcap").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn rate_prints_plain_number() {
    let (code, out, _) = run(&["rate", "--q", "128", "--bits", "31", "--n", "1024"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "3.875");
}

#[test]
fn rate_json_reports_margin() {
    let (code, out, _) = run(&["rate", "--q", "128", "--bits", "31", "--n", "1024", "--entropy", "8"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    let text = v.to_string();
    assert!(text.contains("-4224"), "{text}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["rate", "--q", "128"]).0, EXIT_USAGE);
    assert_eq!(run(&["no-such-command"]).0, EXIT_USAGE);
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"theorem":"thm3","source":{"kind":"bernoulli","p":0.2},"n":[8],"trials":10}"#);
    // config names a different experiment than the subcommand
    assert_eq!(run(&["simulate", "thm4", "--config", &cfg]).0, EXIT_USAGE);
}

#[test]
fn capacity_json_for_bsc() {
    let dir = tempfile::tempdir().unwrap();
    let ch = write(dir.path(), "bsc.csv", "x,0,1\n0,0.89,0.11\n1,0.11,0.89\n");
    let (code, out, _) = run(&["capacity", "--channel", &ch]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    let c = v["capacity_bits"].as_f64().unwrap();
    let h = -(0.11f64 * 0.11f64.log2() + 0.89 * 0.89f64.log2());
    assert!((c - (1.0 - h)).abs() < 1e-9);
}

#[test]
fn capacity_failure_writes_null_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let ch = write(dir.path(), "z.csv", "x,0,1\n0,1,0\n1,0.3,0.7\n");
    let (code, out, _) = run(&["capacity", "--channel", &ch, "--max-iter", "2", "--tol", "1e-14"]);
    assert_eq!(code, EXIT_COMPUTATION);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["capacity_bits"].is_null());
    assert!(!v["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn missing_input_file_is_a_computation_error() {
    let (code, _, err) = run(&["capacity", "--channel", "/nonexistent/channel.csv"]);
    assert_eq!(code, EXIT_COMPUTATION);
    assert!(!err.is_empty());
}

#[test]
fn rd_curve_csv_has_header_and_points() {
    let dir = tempfile::tempdir().unwrap();
    let src = write(dir.path(), "src.csv", "symbol,prob\n0,0.7\n1,0.3\n");
    let d = write(dir.path(), "d.csv", "v,0,1\n0,0,1\n1,1,0\n");
    let out = dir.path().join("rd.csv");
    let (code, _, _) = run(&["rd-curve", "--source", &src, "--distortion", &d, "--points", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "distortion,rate,slope");
    assert!(lines[4].starts_with("0.3,0,"), "{}", lines[4]);
}

#[test]
fn typical_set_csv_lists_members() {
    let dir = tempfile::tempdir().unwrap();
    let src = write(dir.path(), "src.csv", "symbol,prob\na,0.8\nb,0.2\n");
    let out = dir.path().join("ts.csv");
    let (code, summary, _) = run(&["typical-set", "--source", &src, "--n", "8", "--epsilon", "0.15", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&out).unwrap();
    // Bernoulli(0.2) at n = 8: exactly the 28 sequences with two b's
    assert_eq!(text.lines().count(), 29);
    assert!(text.lines().skip(1).all(|l| l.split(',').next().unwrap().matches('b').count() == 2));
    let v: Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(v["size"], 28);
    assert!((v["mass"].as_f64().unwrap() - 28.0 * 0.04 * 0.8f64.powi(6)).abs() < 1e-12);
}

#[test]
fn collapse_audit_flags_collapsed_classes() {
    let dir = tempfile::tempdir().unwrap();
    let emb = write(
        dir.path(),
        "e.csv",
        "id,label,v_1,z_1,z_2\n0,a,0.0,1,0\n1,a,3.0,1,0\n2,b,1.0,0,1\n3,b,1.0,0,1\n",
    );
    let (code, out, _) = run(&["collapse-audit", "--embeddings", &emb]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["degeneracy_flag"], Value::Bool(true));

    let (code, out, _) = run(&["audit-support", "--embeddings", &emb]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["distinct_nonzero_count"], 2);
}

#[test]
fn out_dir_env_redirects_and_manifest_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"theorem":"thm3","source":{"kind":"bernoulli","p":0.2},"n":[8],"rates":[0.5,1.0],"trials":200,"seed":1}"#,
    );
    let out_dir = dir.path().join("runs");
    // only this test touches the variable
    std::env::set_var(OUT_DIR_ENV, &out_dir);
    let (code, _, _) = run(&["simulate", "thm3", "--config", &cfg, "--out", "report.json", "--csv", "report.csv"]);
    std::env::remove_var(OUT_DIR_ENV);
    assert_eq!(code, EXIT_OK);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["records"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "simulate");
    let digest = manifest["inputs"][&cfg].as_str().unwrap();
    assert_eq!(digest.len(), 64);
}

#[test]
fn simulate_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"theorem":"thm3","source":{"kind":"bernoulli","p":0.2},"n":[8],"rates":[1.0],"trials":50,"seed":1}"#,
    );
    let (code, out, _) = run(&["simulate", "thm3", "--config", &cfg, "--trials", "20", "--n", "6,10", "--seed", "9"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 2);
    assert!(recs.iter().all(|r| r["trials"] == 20));
    assert_eq!(v["config"]["seed"], 9);
}
