use std::path::Path;
use std::process::{Command, Output};

use cr_contact::config::ProblemConfig;
use cr_contact::study::{parse_csv, CSV_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cr-contact"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn small_config(dir: &Path) -> String {
    let mut cfg = ProblemConfig::example_5_1();
    cfg.mesh.levels = 3;
    cfg.time.base_steps = 4;
    let path = dir.join("small.toml");
    std::fs::write(&path, cfg.to_toml_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn study_writes_csv_with_header_and_empty_first_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("study.csv");
    let o = run(&["study", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.next().unwrap().split(',').nth(5), Some(""));
    let rows = parse_csv(&text).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r.dof).collect::<Vec<_>>(), [28, 104, 400]);
    assert_eq!(rows.iter().map(|r| r.steps).collect::<Vec<_>>(), [4, 8, 16]);
    assert!(rows[0].error.unwrap() > rows[1].error.unwrap());
    assert!(rows[2].error.is_none());
}

#[test]
fn study_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let a = run(&["study", "--config", &cfg]);
    let b = run(&["study", "--config", &cfg, "--parallel"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn solve_dumps_one_line_per_free_edge() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("fields.txt");
    let o = run(&[
        "solve",
        "--preset",
        "example-5.1",
        "--level",
        "1",
        "--dump-fields",
        dump.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&dump).unwrap();
    // 4x4 grid: 56 edges, 4 on the clamped side
    assert_eq!(text.lines().count(), 52);
    for line in text.lines() {
        let cols: Vec<f64> = line.split_whitespace().map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 4);
        assert!(cols[0] < 4.0, "clamped edge dumped: {line}");
    }
    assert!(String::from_utf8_lossy(&o.stdout).contains("104"));
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let mut cfg = ProblemConfig::example_5_1().to_toml_string();
    cfg = cfg.replace("poisson = 0.3", "poisson = 0.7");
    std::fs::write(&bad, cfg).unwrap();
    let o = run(&["solve", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).to_lowercase().contains("poisson"));

    assert_eq!(run(&["solve", "--preset", "no-such"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--config", "/nonexistent.toml"]).status.code(), Some(1));
    assert_eq!(run(&["solve"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn solver_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ProblemConfig::example_5_1();
    cfg.solver.max_iter = 1;
    cfg.solver.finalize = false;
    let path = dir.path().join("capped.toml");
    std::fs::write(&path, cfg.to_toml_string()).unwrap();
    let o = run(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn printed_preset_round_trips() {
    let o = run(&["config", "--preset", "example-5.1"]);
    assert!(o.status.success());
    let cfg = ProblemConfig::from_toml_str(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(cfg, ProblemConfig::example_5_1());
}
