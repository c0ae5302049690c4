use std::path::Path;
use std::process::{Command, Output};

use sbp_hodge::field_io::read_csv;

fn sbp_hodge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbp-hodge"))
        .args(args)
        .env_remove("SBP_HODGE_BREAK_OPERATOR")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_theorems_succeeds() {
    let out = sbp_hodge(&["verify-theorems"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&out);
    assert_eq!(report["passed"], true);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(
        sbp_hodge(&["verify-theorems", "--order", "5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        sbp_hodge(&["remainder", "--n", "4", "--order", "6"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(sbp_hodge(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        sbp_hodge(&["mhd", "--eps-a", "0", "--eps-m", "0", "--n", "21"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        sbp_hodge(&["--config", "/nonexistent.toml", "verify-theorems"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn broken_operator_fails_loudly() {
    let out = Command::new(env!("CARGO_BIN_EXE_sbp-hodge"))
        .args(["remainder", "--order", "2", "--n", "12"])
        .env("SBP_HODGE_BREAK_OPERATOR", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("violates"), "{stderr}");
}

#[test]
fn even_grid_has_no_plane_for_mhd() {
    let out = sbp_hodge(&["mhd", "--order", "2", "--n", "20"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("x3 = 0"));
}

#[test]
fn remainder_writes_readable_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = sbp_hodge(&["remainder", "--order", "4", "--n", "20", "--out", out_dir]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = json(&out);

    let read = |name: &str| read_csv(std::fs::File::open(dir.path().join(name)).unwrap()).unwrap();
    let u = read("u.csv");
    let g = read("grad_phi.csv");
    let s = read("rot_v.csv");
    let r = read("remainder.csv");
    assert_eq!(u.shape(), &[20, 20]);
    assert_eq!(u.n_components(), 2);
    let defect = (&(&(&u - &g) - &s) - &r).max_abs();
    assert!(defect < 1e-14, "{defect}");
    let r_max = r.max_abs() / u.max_abs();
    let reported = summary["remainder_max_ratio"].as_f64().unwrap();
    assert!((r_max - reported).abs() <= 1e-14 * reported.max(1.0));
    assert!(Path::new(out_dir).join("diagnostics.json").exists());
}

#[test]
fn runs_are_deterministic() {
    let a = sbp_hodge(&["remainder", "--order", "4", "--n", "16"]);
    let b = sbp_hodge(&["remainder", "--order", "4", "--n", "16"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "order = 4\nn = [16, 24]\ntol = 1e-12\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let out = sbp_hodge(&["--config", cfg, "convergence"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = json(&out);
    assert_eq!(table["order"], 4);
    assert_eq!(table["rows"].as_array().unwrap().len(), 2);

    let out = sbp_hodge(&[
        "--config",
        cfg,
        "convergence",
        "--order",
        "2",
        "--n",
        "9,13,17",
    ]);
    let table = json(&out);
    assert_eq!(table["order"], 2);
    assert_eq!(table["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn oscillations_prints_csv() {
    let out = sbp_hodge(&["oscillations", "--order", "6", "--n", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("index,x,osc\n"));
    assert_eq!(text.lines().count(), 32);
}
