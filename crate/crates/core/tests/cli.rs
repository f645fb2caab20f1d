use std::fs;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdmp-scl")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn lists_builtins() {
    let o = cli(&["list-scenarios"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "production\ntraffic-free\ntraffic-congested\n");
}

#[test]
fn show_then_validate_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["show", "traffic-congested"]);
    assert!(o.status.success());
    let path = dir.path().join("c.toml");
    fs::write(&path, stdout(&o)).unwrap();
    let v = cli(&["validate", path.to_str().unwrap()]);
    assert!(v.status.success(), "{}", String::from_utf8_lossy(&v.stderr));
}

#[test]
fn validate_rejects_bad_file() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&cli(&["show", "traffic-free"])).replace("center = 0.4", "center = 0.05");
    let path = dir.path().join("bad.toml");
    fs::write(&path, text).unwrap();
    let o = cli(&["validate", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("a_max"));
}

#[test]
fn run_with_overrides_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = cli(&[
        "run",
        "--scenario",
        "traffic-free",
        "--seed",
        "5",
        "--samples",
        "2",
        "--dx",
        "0.5",
        "--cfl",
        "0.4",
        "--initial-alpha",
        "0.35",
        "--threads",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: toml::Table = fs::read_to_string(out.join("run_meta.toml")).unwrap().parse().unwrap();
    assert_eq!(meta["n_cells"].as_integer(), Some(800));
    assert_eq!(meta["initial_alpha"].as_float(), Some(0.35));
    assert_eq!(meta["config"]["cfl_number"].as_float(), Some(0.4));
    let paths = fs::read_to_string(out.join("paths.csv")).unwrap();
    assert!(paths.lines().nth(1).unwrap().starts_with("0,0,0.35,"));
}

#[test]
fn flux_curves_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curves.csv");
    let o = cli(&["flux-curves", "--scenario", "production", "--alphas", "0,1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "alpha,rho,flux");
    assert_eq!(rows.len(), 1 + 2 * 201);
    assert_eq!(rows[1], "0,0,0");
}

#[test]
fn unknown_scenario_fails() {
    let o = cli(&["run", "--scenario", "no-such-thing", "--out", "/nonexistent"]);
    assert!(!o.status.success());
}
