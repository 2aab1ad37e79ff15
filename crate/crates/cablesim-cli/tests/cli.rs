//! End-to-end checks of the binary: exit codes, artifacts, report text.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cablesim"))
}

fn run_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn run_compare_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--controller", "proposed", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    run_ok(&out);
    assert!(dir.path().join("proposed.csv").is_file());
    let sidecar = dir.path().join("proposed.json");
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sidecar).unwrap()).unwrap();
    let duration = parsed["summary"]["duration"].as_f64().unwrap();

    let out = bin()
        .args([
            "run",
            "--controller",
            "ptp",
            "--ref-duration",
            &duration.to_string(),
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    run_ok(&out);

    let out = bin()
        .arg("compare")
        .arg(dir.path().join("ptp.json"))
        .arg(&sidecar)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    run_ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("savings:"), "missing savings line: {text}");
    assert!(dir.path().join("report.txt").is_file());
    assert!(dir.path().join("report.json").is_file());
}

#[test]
fn ptp_without_reference_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--controller", "ptp", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_scenario_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("bad.cfg");
    std::fs::write(&scenario, "payload_mass = -3\n").unwrap();
    let out = bin()
        .args(["run", "--controller", "proposed", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["run", "--controller", "proposed", "--scenario"])
        .arg(dir.path().join("missing.cfg"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn swapped_compare_arguments_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["demo", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    run_ok(&out);
    for f in [
        "proposed.csv",
        "proposed.json",
        "ptp.csv",
        "ptp.json",
        "report.txt",
        "report.json",
        "energy.svg",
        "trajectory.svg",
        "brakes.svg",
    ] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let out = bin()
        .arg("compare")
        .arg(dir.path().join("proposed.json"))
        .arg(dir.path().join("ptp.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn timeout_flag_produces_a_run_fault() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--controller", "proposed", "--timeout", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // The partial log is still written.
    assert!(dir.path().join("proposed.csv").is_file());
}
