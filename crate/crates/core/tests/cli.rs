use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skewns"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn verify_default_passes() {
    let out = run(&["verify", "--trials", "10", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(
        text(&out.stdout)
            .lines()
            .filter(|l| l.starts_with("PASS"))
            .count(),
        7
    );
}

#[test]
fn verify_fault_names_the_skew_identity() {
    let d = tempfile::tempdir().unwrap();
    let out = run(&[
        "verify",
        "--trials",
        "5",
        "--inject-fault",
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(err.contains("skew_identity"), "{err}");
    assert!(err.contains("phi="), "offending state is reported: {err}");
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(rep["passed"], false);
    assert_eq!(rep["fault_injected"], true);
}

#[test]
fn verify_zero_trials_is_usage_error() {
    assert_eq!(run(&["verify", "--trials", "0"]).status.code(), Some(2));
}

#[test]
fn unknown_subcommand_and_flag_are_usage_errors() {
    assert_eq!(run(&["explode"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn audit_periodic_inviscid_passes_and_writes_outputs() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config("periodic_inviscid.json");
    let out = run(&[
        "audit",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = std::fs::read_to_string(d.path().join("energy.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,time,energy,rate_measured,surface_inviscid,surface_viscous,residual"
    );
    assert_eq!(lines.count(), 21);
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("report.json")).unwrap())
            .unwrap();
    assert!(rep["summary"]["max_relative_residual"].as_f64().unwrap() <= 1e-12);
    assert_eq!(rep["config"]["nx"], 33);
    assert_eq!(rep["steps"].as_array().unwrap().len(), 21);
}

#[test]
fn audit_bounded_viscous_passes() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config("bounded_viscous.json");
    let out = run(&[
        "audit",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = std::fs::read_to_string(d.path().join("energy.csv")).unwrap();
    // surfaces are active on a bounded grid
    let row: Vec<f64> = csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .skip(1)
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(row[3] != 0.0 && row[4] != 0.0);
}

#[test]
fn reproducible_outputs_are_byte_identical() {
    let cfg = config("bounded_viscous.json");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = run(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--reproducible",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    }
    for f in ["energy.csv", "report.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn config_echo_reruns_the_case() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = config("periodic_inviscid.json");
    run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "5",
        "--reproducible",
        "--out",
        a.path().to_str().unwrap(),
    ]);
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("report.json")).unwrap())
            .unwrap();
    let echo = b.path().join("echo.json");
    std::fs::write(&echo, rep["config"].to_string()).unwrap();
    let out = run(&[
        "run",
        "--config",
        echo.to_str().unwrap(),
        "--reproducible",
        "--out",
        b.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(
        std::fs::read(a.path().join("energy.csv")).unwrap(),
        std::fs::read(b.path().join("energy.csv")).unwrap()
    );
}

#[test]
fn audit_missing_config_names_path() {
    let out = run(&["audit", "--config", "/definitely/missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("/definitely/missing.json"));
}

#[test]
fn audit_unknown_key_reports_line() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join("c.json");
    std::fs::write(
        &p,
        "{\n \"nx\": 9,\n \"ny\": 9,\n \"kind\": \"periodic\",\n \"cfl_number\": 0.3\n}",
    )
    .unwrap();
    let out = run(&["audit", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(
        err.contains("cfl_number") && err.contains("line 5"),
        "{err}"
    );
}

#[test]
fn count_bc_default_sweep() {
    let d = tempfile::tempdir().unwrap();
    let out = run(&[
        "count-bc",
        "--gamma",
        "1.4",
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = std::fs::read_to_string(d.path().join("bc_table.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 10);
    for r in &rows {
        let expect = if r[1] == "1" { "3" } else { "4" };
        assert_eq!(r[11], expect);
        assert_eq!(r[12], expect);
    }
}

#[test]
fn count_bc_flags_critical_row() {
    let d = tempfile::tempdir().unwrap();
    let out = run(&[
        "count-bc",
        "--mn-sq",
        "0.5",
        "--critical",
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.path().join("bc_table.csv")).unwrap();
    let flagged: Vec<_> = csv.lines().filter(|l| l.ends_with("beta_zero")).collect();
    assert_eq!(flagged.len(), 2);
    for l in flagged {
        assert_eq!(l.split(',').nth(11), Some(""));
    }
}

#[test]
fn count_bc_rejects_gamma_out_of_range() {
    let d = tempfile::tempdir().unwrap();
    let out = run(&[
        "count-bc",
        "--gamma",
        "2.5",
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!d.path().join("bc_table.csv").exists());
}
