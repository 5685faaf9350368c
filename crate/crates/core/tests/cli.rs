use std::process::Command;

use bosegas::report::{emit, render, run_scan, Format, PartialConfig};
use bosegas::Error;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bosegas"))
}

fn config() -> PartialConfig {
    PartialConfig::from_toml(
        r#"
dim = 3
potential = "soft_sphere:V0=2,R0=1"
rho-min = 1e-8
rho-max = 1e-5
rho-points = 4
rho-log = true
bounds = "all"
"#,
    )
    .unwrap()
}

#[test]
fn scan_is_reproducible() {
    let cfg = config().finish().unwrap();
    let first = run_scan(&cfg).unwrap();
    let second = run_scan(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for format in [Format::Csv, Format::Json] {
        assert_eq!(render(&first, format).unwrap(), render(&second, format).unwrap());
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        emit(&first, format, &a).unwrap();
        emit(&second, format, &b).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
}

#[test]
fn unwritable_path_is_io_error() {
    let cfg = config().finish().unwrap();
    let rows = run_scan(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    assert!(matches!(emit(&rows, Format::Csv, &path), Err(Error::Io(_))));
}

#[test]
fn binary_scan_matches_library_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("scan.toml");
    std::fs::write(
        &cfg_path,
        "dim = 3\npotential = \"soft_sphere:V0=2,R0=1\"\nrho-min = 1e-8\nrho-max = 1e-5\nrho-points = 4\nrho-log = true\nformat = \"json\"\n",
    )
    .unwrap();
    let run = |out: &str| {
        let status = bin()
            .args(["scan", "--config"])
            .arg(&cfg_path)
            .args(["--format", "csv", "--out"])
            .arg(dir.path().join(out))
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read_to_string(dir.path().join(out)).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert_eq!(a, b);
    let rows = run_scan(&config().finish().unwrap()).unwrap();
    assert_eq!(a, render(&rows, Format::Csv).unwrap());
    assert!(a.starts_with("n,rho,Y,"));
}

#[test]
fn binary_reports_errors_with_exit_code() {
    let out = bin().args(["scatter", "--dim", "2", "--potential", "soft_sphere:V0=2,R0=1"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));

    let out = bin().args(["scan", "--dim", "3"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn binary_scatter_record() {
    let out = bin().args(["scatter", "--dim", "3", "--potential", "soft_sphere:V0=2,R0=1"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let a = v["a"].as_f64().unwrap();
    assert!((a - (1.0 - 1f64.tanh())).abs() < 1e-9);
}

#[test]
fn binary_legendre() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("e.txt");
    std::fs::write(&input, "0 0\n1 1\n2 4\n3 9\n").unwrap();
    let out = bin()
        .arg("legendre")
        .arg(&input)
        .args(["--mu-min", "0", "--mu-max", "4", "--mu-points", "5"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.to_string().contains("unbounded"));
}
