//! End-to-end tests of the `mildobs` binary: exit codes, validation
//! messages, and the determinism contract at the file level.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mildobs"))
}

fn run_in(dir: &std::path::Path, args: &[&str]) -> std::process::Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

#[test]
fn no_args_prints_usage_and_exits_2() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("subcommands"));
}

#[test]
fn degenerate_pmf_rejected_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["hitprob", "--nu.pmf", "1:1.0", "--sim.half_line", "2", "--sim.replicates", "10"],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sigma^2 > 0"), "stderr: {err}");
}

#[test]
fn unknown_key_rejected_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["hitprob", "--sim.half_line", "2", "--sim.replicates", "5", "--sim.bogus", "1"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sim.bogus"));
}

#[test]
fn numerical_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["exitprob-oracle", "--oracle.x_list", "nan"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerics"));
}

#[test]
fn config_file_plus_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "sim.half_line = 2\nsim.replicates = 200\nsim.dt = 0.01\nsim.seed = 5\n# comment\n",
    )
    .unwrap();
    let out = run_in(
        tmp.path(),
        &["hitprob", "--config", cfg.to_str().unwrap(), "--sim.replicates", "300"],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("out/hitprob.csv")).unwrap();
    // header + 300 replicate rows
    assert_eq!(csv.lines().count(), 301);
}

#[test]
fn degenerate_stop_radius_hits_always() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["hitprob", "--sim.stop_radius", "0", "--sim.replicates", "50", "--sim.t_max", "1"],
    );
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/hitprob.summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["summary"]["estimate"], serde_json::json!(1.0));
}

#[test]
fn rerun_is_byte_identical_and_env_independent() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "hitprob",
        "--sim.half_line",
        "1.5",
        "--sim.epsilon",
        "0.1",
        "--sim.medium",
        "homogeneous",
        "--sim.replicates",
        "2000",
        "--sim.dt",
        "0.005",
        "--sim.bridge",
        "true",
        "--sim.seed",
        "99",
        "--out",
        "a",
    ];
    let out = run_in(tmp.path(), &args);
    assert_eq!(out.status.code(), Some(0));
    let mut args_b: Vec<&str> = args.to_vec();
    *args_b.last_mut().unwrap() = "b";
    // Scrubbed environment: behavior must not depend on env vars.
    let out = bin()
        .args(&args_b)
        .current_dir(tmp.path())
        .env_clear()
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let a = std::fs::read(tmp.path().join("a/hitprob.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("b/hitprob.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn selftest_passes_and_degraded_selftest_fails() {
    let out = bin().arg("selftest").output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.contains("PASS kappa-closed-form"));
    assert!(text.contains("PASS bvp-vs-first-integral"));

    let out = bin().args(["selftest", "--selftest.degrade_bvp", "true"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL bvp-vs-first-integral"));
}

#[test]
fn bvp_subcommand_emits_ladder_json() {
    let out = bin().args(["bvp", "--bvp.a", "0", "--bvp.radius", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["ladder"].as_array().unwrap().len(), 6);
    let u0 = v["u0"].as_f64().unwrap();
    assert!((u0 - 8.8475).abs() < 1e-2, "u0 = {u0}");
}

#[test]
fn field_coverage_emits_csv_with_kappa_column() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &[
            "field",
            "coverage",
            "--field.intensity",
            "0.5",
            "--field.seed",
            "3",
            "--coverage.n",
            "50000",
            "--coverage.halfwidth",
            "500000",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("out/field_coverage.csv")).unwrap();
    assert!(csv.starts_with("window_halfwidth,n,estimate,se,kappa_analytic,z"));
}
