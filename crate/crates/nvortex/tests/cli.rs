//! End-to-end tests of the `nvortex` binary: flags, files, exit codes,
//! and record determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_nvortex")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary should launch")
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nvortex-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn record(dir: &Path, stem: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join(stem)).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn solve_writes_record_and_profile() {
    let dir = tmp_dir("solve");
    let out = run(&[
        "solve",
        "--alpha",
        "0.1",
        "--n",
        "1",
        "--R",
        "8",
        "--Q0",
        "60",
        "--N",
        "40",
        "--restarts",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let rec = record(&dir, "solve.json");
    let kappa = rec["kappa"].as_f64().unwrap();
    assert!((kappa - 2.5827).abs() <= 0.05, "kappa(60) = {kappa}");
    assert_eq!(rec["schema"], 1);
    assert_eq!(rec["converged"], true);
    assert!(rec["bounds"]["kappa_upper"].as_f64().unwrap() > kappa);

    let profile = std::fs::read_to_string(dir.join("solve_profile.csv")).unwrap();
    assert!(profile.starts_with("r,u,du_dr\n"));
    assert_eq!(profile.lines().count(), 802);
}

#[test]
fn solve_winding_two_at_ten_pi() {
    let dir = tmp_dir("n2");
    let out = run(&[
        "solve",
        "--alpha",
        "0.1",
        "--n",
        "2",
        "--R",
        "8",
        "--Q0",
        "31.4159",
        "--N",
        "20",
        "--restarts",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rec = record(&dir, "solve.json");
    let kappa = rec["kappa"].as_f64().unwrap();
    assert!((kappa - 0.0607).abs() <= 0.05, "kappa = {kappa}");
}

#[test]
fn zero_flux_is_a_config_error() {
    let out = run(&["solve", "--Q0", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flux_and_kappa_together_is_a_config_error() {
    let out = run(&["solve", "--Q0", "40", "--kappa", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn records_are_deterministic_modulo_timestamps() {
    let dir_a = tmp_dir("det-a");
    let dir_b = tmp_dir("det-b");
    for dir in [&dir_a, &dir_b] {
        let out = run(&[
            "solve",
            "--alpha",
            "0.1",
            "--n",
            "1",
            "--R",
            "8",
            "--Q0",
            "15",
            "--N",
            "16",
            "--cells",
            "128",
            "--seed",
            "7",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let mut a = record(&dir_a, "solve.json");
    let mut b = record(&dir_b, "solve.json");
    for rec in [&mut a, &mut b] {
        rec["timestamp_ms"] = 0.into();
        rec["wall_time_ms"] = 0.into();
    }
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap(),
        "records differ beyond timestamps"
    );
}

#[test]
fn sweep_over_flux_grid() {
    let dir = tmp_dir("sweep");
    let out = run(&[
        "sweep",
        "--alpha",
        "0.1",
        "--n",
        "1",
        "--R",
        "8",
        "--Q0",
        "10,20",
        "--N",
        "16",
        "--cells",
        "128",
        "--restarts",
        "1",
        "--jobs",
        "2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("param,kappa,flux,residual,converged\n"));
    assert_eq!(csv.lines().count(), 3);
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("sweep.json")).unwrap()).unwrap();
    let k10 = rows[0]["kappa"].as_f64().unwrap();
    let k20 = rows[1]["kappa"].as_f64().unwrap();
    assert!(k10 < k20, "kappa should increase with flux: {k10} vs {k20}");
    assert!(dir.join("sweep_kappa.xy").exists());
}

#[test]
fn sweep_kappa_grid_uses_oracle() {
    let dir = tmp_dir("sweep-kappa");
    let out = run(&[
        "sweep",
        "--alpha",
        "0.1",
        "--n",
        "1",
        "--R",
        "8",
        "--kappa",
        "0.0001",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    let line = csv.lines().nth(1).unwrap();
    let flux: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
    assert!((flux - 13.6).abs() / 13.6 < 0.03, "oracle flux {flux}");
}

#[test]
fn sweep_over_winding_grid() {
    let dir = tmp_dir("sweep-n");
    let out = run(&[
        "sweep",
        "--alpha",
        "0.1",
        "--n",
        "1,2",
        "--R",
        "8",
        "--Q0",
        "31.4159",
        "--N",
        "16",
        "--cells",
        "128",
        "--restarts",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("sweep.json")).unwrap()).unwrap();
    let k1 = rows[0]["kappa"].as_f64().unwrap();
    let k2 = rows[1]["kappa"].as_f64().unwrap();
    assert!(k1 > k2, "kappa should decrease with winding: {k1} vs {k2}");
}

#[test]
fn empty_sweep_is_a_config_error() {
    let out = run(&["sweep", "--alpha", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hat_basis_solve() {
    let dir = tmp_dir("hat");
    let out = run(&[
        "solve",
        "--alpha",
        "0.1",
        "--n",
        "1",
        "--R",
        "8",
        "--Q0",
        "20",
        "--basis",
        "hat",
        "--N",
        "63",
        "--cells",
        "64",
        "--restarts",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rec = record(&dir, "solve.json");
    let kappa = rec["kappa"].as_f64().unwrap();
    assert!((kappa - 0.0712).abs() < 0.01, "hat kappa = {kappa}");
    assert_eq!(rec["basis"], "hat");
}

#[test]
fn iteration_starvation_exits_not_converged() {
    let dir = tmp_dir("starved");
    let out = run(&[
        "solve",
        "--alpha",
        "0.1",
        "--n",
        "1",
        "--R",
        "8",
        "--Q0",
        "40",
        "--N",
        "16",
        "--cells",
        "128",
        "--max-iters",
        "1",
        "--restarts",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bounds_report_command() {
    let dir = tmp_dir("bounds");
    let out = run(&[
        "bounds",
        "--alpha",
        "0.1",
        "--n",
        "1",
        "--R",
        "8",
        "--Q0",
        "40",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rep = record(&dir, "bounds.json");
    let upper = rep["kappa_upper"].as_f64().unwrap();
    assert!((upper - 9.9470).abs() < 5e-5, "kappa_upper = {upper}");
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tmp_dir("config");
    let cfg = dir.join("run.conf");
    std::fs::write(
        &cfg,
        "alpha = 0.1\nn = 1\nR = 8\nQ0 = 15\nN = 16\ncells = 128\n",
    )
    .unwrap();
    // config supplies everything
    let out = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rec = record(&dir, "solve.json");
    assert_eq!(rec["q0"].as_f64().unwrap(), 15.0);
    // a flag overrides the file
    let out = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--Q0",
        "10",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rec = record(&dir, "solve.json");
    assert_eq!(rec["q0"].as_f64().unwrap(), 10.0);
}

#[test]
fn strict_mode_flags_bound_violations() {
    // kappa(Q0=10) < 0 is only an advisory, so --strict still exits 0
    let dir = tmp_dir("strict");
    let out = run(&[
        "solve",
        "--alpha",
        "0.1",
        "--n",
        "1",
        "--R",
        "8",
        "--Q0",
        "10",
        "--N",
        "16",
        "--cells",
        "128",
        "--strict",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "advisories must not trip --strict");
    let rec = record(&dir, "solve.json");
    let advisories: Vec<_> = rec["bounds"]["violations"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|v| v["advisory"] == true)
        .collect();
    assert!(!advisories.is_empty(), "expected the decay advisory");
}

#[test]
fn crosscheck_compares_solver_with_oracle() {
    let dir = tmp_dir("crosscheck");
    let out = run(&[
        "crosscheck",
        "--alpha",
        "0.1",
        "--n",
        "1",
        "--R",
        "8",
        "--Q0",
        "20",
        "--N",
        "24",
        "--restarts",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rec = record(&dir, "crosscheck.json");
    assert!(rec["flux_rel_diff"].as_f64().unwrap() < 0.02);
    assert!(rec["max_amplitude_rel_diff"].as_f64().unwrap() < 0.02);
}
