use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn dhj(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dhj"));
    cmd.args(args).env_remove("DHJ_OUTPUT_DIR").env_remove("DHJ_WORKERS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

const SMALL_PICARD: &str = "kind = \"picard\"\n[grid]\nn_vertical = 60\nn_transverse = 33\n";

#[test]
fn validate_accepts_and_rejects() {
    let dir = tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(&good, SMALL_PICARD).unwrap();
    let out = dhj(&["validate", good.to_str().unwrap()], &[]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["valid"], true);
    assert_eq!(v["kind"], "picard");

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "kind = \"picard\"\n[parameters]\nlamda = 2.0\n").unwrap();
    let out = dhj(&["validate", bad.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    let rec: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(rec["category"], "config");

    let out = dhj(&["validate", dir.path().join("missing.toml").to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_honours_output_dir_env() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, format!("{SMALL_PICARD}[perturbation]\nkind = \"zero\"\n")).unwrap();
    let out_dir = dir.path().join("from-env");
    let out = dhj(&["run", cfg.to_str().unwrap()], &[("DHJ_OUTPUT_DIR", &out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["converged"], true);
    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 2);
    assert!(out_dir.join("manifest.json").exists());
}

#[test]
fn numerical_failure_exits_three() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    let out_dir = dir.path().join("out");
    std::fs::write(&cfg, format!("{SMALL_PICARD}[picard]\nradious = 1e-7\n")).unwrap();
    assert_eq!(dhj(&["run", cfg.to_str().unwrap()], &[]).status.code(), Some(2));

    let text = format!(
        "kind = \"picard\"\noutput_dir = \"{}\"\n[grid]\nn_vertical = 60\nn_transverse = 33\n[picard]\nradius = 1e-7\n",
        out_dir.display()
    );
    std::fs::write(&cfg, text).unwrap();
    let out = dhj(&["run", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(3));
    let rec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("error.json")).unwrap()).unwrap();
    assert_eq!(rec["exit_code"], 3);
    assert_eq!(rec["category"], "numerical");
}

#[test]
fn sweep_prints_collated_table() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, SMALL_PICARD).unwrap();
    let out_dir = dir.path().join("sw");
    let out = dhj(
        &["sweep", cfg.to_str().unwrap(), "--axis", "lambda", "--values", "16,64", "--workers", "2", "--output-dir", out_dir.to_str().unwrap()],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 3);
    assert!(stdout.lines().skip(1).all(|l| l.contains(",ok,")));
    assert_eq!(std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap(), stdout);

    let out = dhj(&["sweep", cfg.to_str().unwrap(), "--axis", "lambda", "--values", ""], &[("DHJ_OUTPUT_DIR", &out_dir)]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);

    let out = dhj(&["sweep", cfg.to_str().unwrap(), "--axis", "lambda", "--values", "1,x"], &[("DHJ_OUTPUT_DIR", &out_dir)]);
    assert_eq!(out.status.code(), Some(2));
    let out = dhj(&["sweep", cfg.to_str().unwrap(), "--axis", "bogus", "--values", "1"], &[("DHJ_OUTPUT_DIR", &out_dir)]);
    assert_eq!(out.status.code(), Some(2));
}
