//! Command-line surface: exit codes, config handling, output structure.

use std::path::Path;
use std::process::{Command, Output};

fn qvdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qvdp"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout_lines(out: &Output) -> Vec<String> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(str::to_string)
        .collect()
}

#[test]
fn steady_emits_one_record() {
    let out = qvdp(&["steady", "--eta", "1", "--delta", "0", "--gamma2", "3"]);
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    let header = lines
        .iter()
        .position(|l| l == "n_bar,q_mandel,cutoff_used,residual")
        .unwrap();
    assert_eq!(lines.len(), header + 2, "exactly one data row");
    let row: Vec<&str> = lines[header + 1].split(',').collect();
    assert_eq!(row.len(), 4);
    let n_bar: f64 = row[0].parse().unwrap();
    assert!(n_bar > 0.0);
    let residual: f64 = row[3].parse().unwrap();
    assert!(residual <= 1e-10);
}

#[test]
fn unknown_config_key_is_a_usage_error_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "detuning = 0.3\n").unwrap();
    let out = qvdp(&["steady", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("detuning"), "stderr: {err}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = qvdp(&["steady", "--detuning", "0.3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn grid_edge_spectrum_exits_with_numeric_failure() {
    // peak near Delta = 3 cannot fit into a +-1 window
    let out = qvdp(&[
        "spectrum",
        "--delta",
        "3",
        "--force",
        "0.2",
        "--gamma2",
        "3",
        "--omega-max",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("narrow"), "stderr: {err}");
}

#[test]
fn invalid_physical_parameters_are_usage_errors() {
    let out = qvdp(&["steady", "--gamma2", "-1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn classical_fixed_points_fig1c_example() {
    let out = qvdp(&[
        "classical",
        "fixed-points",
        "--force",
        "1",
        "--delta",
        "1",
        "--theta",
        "0.7853981634",
        "--gamma2",
        "3",
        "--eta",
        "1.5",
    ]);
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    let header = lines
        .iter()
        .position(|l| l.starts_with("r,phi,stability"))
        .unwrap();
    let rows: Vec<&String> = lines[header + 1..]
        .iter()
        .filter(|l| !l.is_empty())
        .collect();
    assert_eq!(rows.len(), 3);
    let stable = rows
        .iter()
        .filter(|r| r.contains("stable-") && !r.contains("unstable"))
        .count();
    assert_eq!(stable, 2);
}

#[test]
fn lock_phase_rejects_outside_tongue_with_numeric_exit() {
    let out = qvdp(&["classical", "lock-phase", "--eta", "0.2", "--delta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("E_NO_LOCK"));
}

#[test]
fn dumped_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a.csv");
    let eff = dir.path().join("effective.cfg");
    let st = Command::new(env!("CARGO_BIN_EXE_qvdp"))
        .args([
            "sweep",
            "--task",
            "arnold-classical",
            "--gamma2",
            "3",
            "--axis1-name",
            "delta",
            "--axis1-min",
            "0",
            "--axis1-max",
            "1",
            "--axis1-count",
            "5",
            "--seed",
            "7",
        ])
        .arg("--out")
        .arg(&out1)
        .arg("--dump-config")
        .arg(&eff)
        .status()
        .unwrap();
    assert!(st.success());

    let out2 = dir.path().join("b.csv");
    let st = Command::new(env!("CARGO_BIN_EXE_qvdp"))
        .args(["sweep", "--config"])
        .arg(&eff)
        .arg("--out")
        .arg(&out2)
        .status()
        .unwrap();
    assert!(st.success());

    assert_eq!(
        read(&out1),
        read(&out2),
        "config round trip changed the output"
    );
    // seed is recorded in the metadata
    assert!(String::from_utf8_lossy(&read(&out1)).contains("# seed = 7"));
}

#[test]
fn sweep_rows_match_grid_and_record_errors_in_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    // eta axis crossing below the classical pitchfork keeps all rows valid;
    // instead drive gamma2 through zero to force one failing row
    let st = Command::new(env!("CARGO_BIN_EXE_qvdp"))
        .args([
            "sweep",
            "--task",
            "classical-fixed-points",
            "--force",
            "1",
            "--delta",
            "1",
            "--axis1-name",
            "gamma2",
            "--axis1-min",
            "0",
            "--axis1-max",
            "3",
            "--axis1-count",
            "3",
        ])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let text = String::from_utf8(read(&out)).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4, "header + 3 rows: {text}");
    assert!(
        rows[1].ends_with("E_PARAMS"),
        "gamma2 = 0 row records its error: {}",
        rows[1]
    );
    assert!(
        rows[2].ends_with(','),
        "valid rows have an empty error column"
    );
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}
