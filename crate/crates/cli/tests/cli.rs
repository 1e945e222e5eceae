use std::fs;
use std::process::Command;

use tempfile::TempDir;

fn coopsearch() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coopsearch"))
}

const ROOM: &str = "cell_size 1\n..........\n..........\n....#.....\n..........\n";

fn scenario(dir: &TempDir) -> std::path::PathBuf {
    fs::write(dir.path().join("room.txt"), ROOM).unwrap();
    let path = dir.path().join("scenario.toml");
    fs::write(
        &path,
        r#"schema = "coopsearch-scenario v1"
map = "room.txt"
steps = 15
team_size = 2
server_spacing = 0.5
lambda0 = 3.0

[targets]
count = 1

[access_points]
positions = [[0.5, 0.5]]
comm_range = 3.0
"#,
    )
    .unwrap();
    path
}

#[test]
fn validate_with_no_budget_succeeds() {
    let out = coopsearch().args(["validate", "--budget", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bad_config_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "team_size = 0\n").unwrap();
    let out = coopsearch().args(["run", "--config"]).arg(&path).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("team_size"));

    let out = coopsearch().args(["run", "--config", "/nonexistent.toml", "--out", "x"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_sweep_axis_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let path = scenario(&dir);
    let out = coopsearch()
        .args(["sweep", "--config"])
        .arg(&path)
        .args(["--axis", "warp", "--values", "1", "--out"])
        .arg(dir.path().join("s"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("check_in_period"));
}

#[test]
fn run_then_plot() {
    let dir = TempDir::new().unwrap();
    let path = scenario(&dir);
    let run = dir.path().join("run");
    let out = coopsearch().args(["run", "--config"]).arg(&path).args(["--seed", "5", "--out"]).arg(&run).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(fs::read_to_string(run.join("scenario.toml")).unwrap().contains("seed = 5"));
    let out = coopsearch().args(["plot", "--in"]).arg(&run).output().unwrap();
    assert!(out.status.success());
    assert!(run.join("entropy.svg").exists() && run.join("modes.svg").exists());
}

#[test]
fn plotting_a_missing_directory_is_a_runtime_error() {
    let out = coopsearch().args(["plot", "--in", "/nonexistent-dir"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
