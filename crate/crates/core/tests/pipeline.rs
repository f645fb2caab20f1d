use std::fs;

use pdmp_scl::output;
use pdmp_scl::scenario::{builtin_scenario, KernelConfig, ScenarioConfig};
use pdmp_scl::Error;

fn read(dir: &std::path::Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn production_single_path_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = builtin_scenario("production").unwrap();
    let summary = output::run(&config, 3, 1, dir.path(), Some(1)).unwrap();
    assert_eq!(summary.files.len(), 5);

    // one header plus one row per snapshot 0, 0.2, …, 50 at the single probe
    let scatter = read(dir.path(), "scatter.csv");
    let mut lines = scatter.lines();
    assert_eq!(lines.next(), Some("sample_id,t,probe_x,rho,flux"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 251);
    assert!(rows[0].starts_with("0,0,0,"));
    assert!(rows[250].starts_with("0,50,0,"));

    let paths = read(dir.path(), "paths.csv");
    assert_eq!(paths.lines().next(), Some("sample_id,t,alpha,mass,tv,rho@0,flux@0"));
    assert_eq!(paths.lines().count(), 252);

    // every accepted event shows up with its new parameter, rejected ones without
    let events = read(dir.path(), "events.csv");
    for row in events.lines().skip(1) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 9);
        assert_eq!(cols[3] == "true", !cols[8].is_empty());
    }
    assert_eq!(
        events.lines().skip(1).filter(|r| r.split(',').nth(3) == Some("true")).count(),
        summary.meta.total_jumps
    );

    let curves = read(dir.path(), "fluxcurves.csv");
    assert_eq!(curves.lines().count(), 1 + 5 * output::FLUX_CURVE_POINTS);

    let meta: toml::Table = read(dir.path(), "run_meta.toml").parse().unwrap();
    assert_eq!(meta["n_samples"].as_integer(), Some(1));
    assert_eq!(meta["n_cells"].as_integer(), Some(8000));
    // tails beyond ±200 of 1.5(sin x + 1)e^{−|x|/100}: roughly 2·150·e^{−2}
    let tail = meta["truncated_tail_mass"].as_float().unwrap();
    assert!((tail / (300.0 * (-2.0f64).exp()) - 1.0).abs() < 1e-2, "{tail}");
    let embedded: ScenarioConfig = meta["config"].clone().try_into().unwrap();
    assert_eq!(embedded, config);
}

#[test]
fn zero_rate_production_has_candidates_but_no_jumps() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = builtin_scenario("production").unwrap();
    config.set_dx(0.5);
    config.horizon = 10.0;
    config.kernel = KernelConfig::ProductionGaussian {
        window_a: 0.0,
        window_b: 1.0,
        lambda_0: 0.0,
        lambda_1: 1.0,
        center: 0.0,
        variance: 1e-2,
        lambda_max: Some(5.0),
    };
    let summary = output::run(&config, 0, 2, dir.path(), None).unwrap();
    assert_eq!(summary.meta.total_jumps, 0);
    assert!(summary.meta.total_candidates > 0);
    let events = read(dir.path(), "events.csv");
    assert!(events.lines().skip(1).all(|r| r.contains(",false,0,5,")));
    let paths = read(dir.path(), "paths.csv");
    assert!(paths.lines().skip(1).all(|r| r.split(',').nth(2) == Some("0")));
}

#[test]
fn seeds_change_output_and_reruns_reproduce_it() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = builtin_scenario("traffic-free").unwrap();
    config.set_dx(0.5);
    config.horizon = 5.0;
    let body = |seed: u64, label: &str| {
        let out = dir.path().join(label);
        output::run(&config, seed, 3, &out, Some(2)).unwrap();
        read(&out, "events.csv")
    };
    let a = body(1, "a");
    assert_eq!(a, body(1, "b"));
    assert_ne!(a, body(2, "c"));
}

#[test]
fn invalid_config_reports_every_issue() {
    let text = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/traffic-free.toml"))
        .unwrap()
        .replace("theta = 2.1", "theta = 1.5")
        .replace("lambda_0 = 3.0", "lambda_0 = 30.0")
        .replace("probes = [0.0, 1.0]", "probes = [0.0, 1000.0]");
    let config = ScenarioConfig::from_toml(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    match output::run(&config, 0, 1, dir.path(), None) {
        Err(Error::InvalidConfig(issues)) => assert_eq!(issues.len(), 3, "{issues:?}"),
        other => panic!("{other:?}"),
    }
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn unknown_fields_are_rejected() {
    let text = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/production.toml")).unwrap();
    let bad = text.replace("horizon = 50.0", "horizon = 50.0\nhorizn = 3.0");
    assert!(matches!(ScenarioConfig::from_toml(&bad), Err(Error::ConfigParse(_))));
}
