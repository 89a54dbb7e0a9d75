use std::fs;
use std::process::Command;

use crossover_lab::RunManifest;

fn crossover() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crossover"))
}

#[test]
fn spectrum_run_writes_verified_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let status = crossover()
        .args(["spectrum", "--L", "60", "--half-width-h", "2", "--seeds", "3", "--workers", "2", "--master-seed", "5", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let m = RunManifest::read(dir.path()).unwrap();
    assert_eq!(m.tasks.len(), 3);
    assert!(m.verify(dir.path()).is_empty());
    let csv = fs::read_to_string(dir.path().join("eigenvalues.csv")).unwrap();
    assert!(csv.starts_with("task,seed,lambda,center,"));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    fs::write(&cfg, "L_time_units=40.0\nh_mean_spacings=2.0\nseed_count=2\n").unwrap();
    let out = dir.path().join("out");
    let status = crossover().args(["lattice", "--mesh", "0.01", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let m = RunManifest::read(&out).unwrap();
    assert_eq!(m.config["L_time_units"], "40.0");
    assert_eq!(m.config["mesh_time_units"], "0.01");
    assert_eq!(m.config["command"], "lattice");
}

#[test]
fn bad_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let status = crossover().args(["spectrum", "--E", "0.5", "--out"]).arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let cfg = dir.path().join("bad.ini");
    fs::write(&cfg, "no_such_key=1\n").unwrap();
    let status = crossover().args(["oracle", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn failing_run_exits_with_one() {
    // 20 realizations cannot feed the Poisson suite
    let dir = tempfile::tempdir().unwrap();
    let status = crossover().args(["stats", "poisson", "--L", "40", "--seeds", "20", "--out"]).arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn oracle_table_rows() {
    let dir = tempfile::tempdir().unwrap();
    let status = crossover()
        .args(["oracle", "--lambda-min", "0", "--lambda-max", "4", "--lambda-points", "5", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("oracle.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
}
