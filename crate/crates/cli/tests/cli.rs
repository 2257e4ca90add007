//! End-to-end tests of the command-line interface: exit codes, CSV shape,
//! config validation, and anchor-file ingestion.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ragd-bench"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const SPHERE_RUN: &str = r#"
[manifold]
kind = "sphere"
dimension = 3

[objective]
kind = "squared-distance"
radius = 0.2

[algorithm]
kind = "ragd-constant"
max_iters = 20
tolerance = 0.0

[run]
seed = 5
x0 = "ball(0.03)"
"#;

fn run_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.toml", SPHERE_RUN);
    let out_dir = dir.path().join("out");
    let out = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    run_ok(&out);
    let csv = std::fs::read_to_string(out_dir.join("trace-ragd-constant.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,f_gap,dist_to_min,grad_norm,alpha,gamma,gamma_bar,phi_star,lambda,cmp_lhs,cmp_rhs,cmp_held,b_next,bound_factor,in_ball"
    );
    assert_eq!(lines.count(), 21);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["schema"], 1);
    assert_eq!(summary["seed"], 5);
    assert_eq!(summary["algorithms"]["ragd-constant"]["comparison_violations"], 0);
}

#[test]
fn zero_iterations_yields_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "exp.toml",
        &SPHERE_RUN.replace("max_iters = 20", "max_iters = 0"),
    );
    let out_dir = dir.path().join("out");
    let out = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    run_ok(&out);
    let csv = std::fs::read_to_string(out_dir.join("trace-ragd-constant.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("0,"));
}

#[test]
fn both_mode_emits_two_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "exp.toml",
        &SPHERE_RUN.replace("kind = \"ragd-constant\"", "kind = \"both\""),
    );
    let out_dir = dir.path().join("out");
    let out = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    run_ok(&out);
    assert!(out_dir.join("trace-ragd-constant.csv").exists());
    assert!(out_dir.join("trace-rgd.csv").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert!(summary["algorithms"]["rgd"].is_object());
}

#[test]
fn cmp_held_recomputable_from_each_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.toml", SPHERE_RUN);
    let out_dir = dir.path().join("out");
    let out = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    run_ok(&out);
    let csv = std::fs::read_to_string(out_dir.join("trace-ragd-constant.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let lhs: f64 = fields[9].parse().unwrap();
        let rhs: f64 = fields[10].parse().unwrap();
        let held: bool = fields[11].parse().unwrap();
        assert_eq!(held, lhs <= rhs + 1e-12 * lhs.abs().max(rhs.abs()).max(1.0));
    }
}

#[test]
fn missing_config_exits_2() {
    let out = bin().args(["run", "--config", "/nonexistent/exp.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_manifold_kind_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "exp.toml",
        &SPHERE_RUN.replace("kind = \"sphere\"", "kind = \"torus\""),
    );
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_anchor_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "exp.toml",
        r#"
[manifold]
kind = "sphere"
dimension = 3

[objective]
kind = "frechet-mean"
radius = 0.2
anchors_file = "missing.txt"

[algorithm]
kind = "ragd-constant"
max_iters = 5

[run]
seed = 1
"#,
    );
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn anchor_file_ingestion_works() {
    let dir = tempfile::tempdir().unwrap();
    // Four points near (1,0,0,0) on the 3-sphere, pre-normalized.
    let mut lines = String::new();
    for coords in [
        [1.0, 0.05, 0.0, 0.0],
        [1.0, -0.05, 0.02, 0.0],
        [1.0, 0.0, -0.04, 0.03],
        [1.0, 0.01, 0.02, -0.05],
    ] {
        let norm: f64 = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        let row: Vec<String> = coords.iter().map(|c| format!("{}", c / norm)).collect();
        lines.push_str(&row.join(" "));
        lines.push('\n');
    }
    std::fs::write(dir.path().join("anchors.txt"), lines).unwrap();
    let cfg = write_config(
        dir.path(),
        "exp.toml",
        r#"
[manifold]
kind = "sphere"
dimension = 3

[objective]
kind = "frechet-mean"
radius = 0.2
anchors_file = "anchors.txt"

[algorithm]
kind = "ragd-constant"
max_iters = 50
tolerance = 0.0

[run]
seed = 1
x0 = "ball(0.05)"
"#,
    );
    let out_dir = dir.path().join("out");
    let out = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    run_ok(&out);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    let gap = summary["algorithms"]["ragd-constant"]["final_f_gap"].as_f64().unwrap();
    assert!(gap.abs() < 1e-12, "final gap {gap}");
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.toml", SPHERE_RUN);
    let o1 = dir.path().join("a");
    let o2 = dir.path().join("b");
    for (out_dir, seed) in [(&o1, "5"), (&o2, "6")] {
        let out = bin()
            .args(["run", "--config"])
            .arg(&cfg)
            .args(["--seed", seed, "--out"])
            .arg(out_dir)
            .output()
            .unwrap();
        run_ok(&out);
    }
    let a = std::fs::read(o1.join("trace-ragd-constant.csv")).unwrap();
    let b = std::fs::read(o2.join("trace-ragd-constant.csv")).unwrap();
    assert_ne!(a, b, "different seeds must change the trace");
}

#[test]
fn verify_geometry_rejects_zero_samples() {
    let out = bin().args(["verify-geometry", "--samples", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_geometry_small_run_passes() {
    let out = bin()
        .args(["verify-geometry", "--model", "hyperbolic-triangles", "--samples", "5000", "--seed", "9"])
        .output()
        .unwrap();
    run_ok(&out);
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["models"]["hyperbolic-triangles"]["violations"], 0);
}

#[test]
fn euclidean_distortion_reports_exact_equality() {
    let out = bin()
        .args(["verify-geometry", "--model", "distortion-euclidean", "--samples", "2000", "--seed", "9"])
        .output()
        .unwrap();
    run_ok(&out);
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(report["models"]["distortion-euclidean"]["exact_equality"], true);
}

#[test]
fn verify_identities_exit_codes() {
    let out = bin().args(["verify-identities", "--p-max", "1"]).output().unwrap();
    run_ok(&out);
    let out = bin().args(["verify-identities", "--p-max", "25"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn grad_check_passes_for_valid_objective() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "exp.toml",
        &format!("{SPHERE_RUN}\n[grad_check]\npairs = 500\npoints = 5\n"),
    );
    let out = bin().args(["grad-check", "--config"]).arg(&cfg).output().unwrap();
    run_ok(&out);
}

#[test]
fn grad_check_flags_wrong_mu() {
    let dir = tempfile::tempdir().unwrap();
    // Doubling mu makes the strong-convexity lower bound false.
    let cfg = write_config(
        dir.path(),
        "exp.toml",
        &format!(
            "{}\n[grad_check]\npairs = 500\npoints = 5\n",
            SPHERE_RUN.replace("radius = 0.2", "radius = 0.2\nmu_scale = 2.0")
        ),
    );
    let out = bin().args(["grad-check", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
}
