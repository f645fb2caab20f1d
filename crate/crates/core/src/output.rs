//! Ensemble runs and their CSV/TOML artifacts. Every file is written in
//! sample-index order, so the bytes depend only on the configuration, the
//! base seed and the sample count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::diagnostics::extract_scatter;
use crate::engine::{run_ensemble, run_ensemble_with_threads, SamplePath};
use crate::error::Result;
use crate::flux::FluxFamily;
use crate::scenario::ScenarioConfig;

pub const FLUX_CURVE_POINTS: usize = 201;

pub const ARTIFACTS: [&str; 5] = ["paths.csv", "events.csv", "scatter.csv", "fluxcurves.csv", "run_meta.toml"];

#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub version: String,
    pub scenario_id: String,
    pub base_seed: u64,
    pub n_samples: usize,
    pub n_cells: usize,
    pub dx: f64,
    pub initial_alpha: f64,
    pub initial_mass: f64,
    /// Mass of the initial profile lying outside the computational domain.
    pub truncated_tail_mass: f64,
    pub truncated_tail_fraction: f64,
    pub lambda_max: f64,
    pub jump_cap: usize,
    pub total_jumps: usize,
    pub total_candidates: usize,
    pub total_solver_steps: usize,
    pub config: ScenarioConfig,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub meta: RunMeta,
    pub files: Vec<PathBuf>,
}

fn probe_label(x: f64) -> String {
    format!("{x}")
}

pub fn paths_csv(paths: &[SamplePath], family: &FluxFamily) -> Result<String> {
    let mut out = String::from("sample_id,t,alpha,mass,tv");
    let probes = paths.first().map(|p| p.probe_positions.as_slice()).unwrap_or(&[]);
    for &x in probes {
        write!(out, ",rho@{}", probe_label(x)).unwrap();
    }
    for &x in probes {
        write!(out, ",flux@{}", probe_label(x)).unwrap();
    }
    out.push('\n');
    for p in paths {
        for s in &p.snapshots {
            write!(out, "{},{},{},{},{}", p.sample_id(), s.t, s.alpha, s.mass, s.tv).unwrap();
            for v in &s.probe_values {
                write!(out, ",{v}").unwrap();
            }
            let f = family.member(s.alpha)?;
            for &v in &s.probe_values {
                write!(out, ",{}", f.value(v)).unwrap();
            }
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn events_csv(paths: &[SamplePath]) -> String {
    let mut out = String::from(
        "sample_id,event_index,candidate_time,accepted,total_rate,lambda_max,functional_value,alpha_before,alpha_after\n",
    );
    for p in paths {
        for (k, e) in p.events.iter().enumerate() {
            let after = e.alpha_after.map(|a| a.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                p.sample_id(),
                k,
                e.candidate_time,
                e.accepted,
                e.total_rate,
                e.lambda_max,
                e.functional_value,
                e.alpha_before,
                after
            )
            .unwrap();
        }
    }
    out
}

pub fn scatter_csv(paths: &[SamplePath], family: &FluxFamily, times: &[f64]) -> Result<String> {
    let mut out = String::from("sample_id,t,probe_x,rho,flux\n");
    for p in paths {
        for r in extract_scatter(p, family, &p.probe_positions, times)? {
            writeln!(out, "{},{},{},{},{}", r.sample_id, r.t, r.probe_x, r.rho, r.flux).unwrap();
        }
    }
    Ok(out)
}

pub fn fluxcurves_csv(family: &FluxFamily, alphas: &[f64]) -> Result<String> {
    let mut out = String::from("alpha,rho,flux\n");
    for (a, u, f) in family.tabulate(alphas, FLUX_CURVE_POINTS)? {
        writeln!(out, "{a},{u},{f}").unwrap();
    }
    Ok(out)
}

/// Simulate `n_samples` paths and write all artifacts into `out_dir`.
/// `threads = None` uses the global rayon pool.
pub fn run(
    config: &ScenarioConfig,
    base_seed: u64,
    n_samples: usize,
    out_dir: &Path,
    threads: Option<usize>,
) -> Result<RunSummary> {
    let built = config.build()?;
    let sc = &built.scenario;
    let paths = match threads {
        Some(n) => run_ensemble_with_threads(sc, base_seed, n_samples, n)?,
        None => run_ensemble(sc, base_seed, n_samples)?,
    };
    let times = sc.snapshot_times();

    let initial_mass = sc.initial.mass();
    let meta = RunMeta {
        version: env!("CARGO_PKG_VERSION").to_string(),
        scenario_id: config.scenario_id.clone(),
        base_seed,
        n_samples,
        n_cells: sc.initial.grid().n_cells(),
        dx: sc.initial.grid().dx(),
        initial_alpha: sc.initial_alpha,
        initial_mass,
        truncated_tail_mass: built.truncated_mass,
        truncated_tail_fraction: built.truncated_mass / (initial_mass + built.truncated_mass),
        lambda_max: sc.kernel.lambda_max(),
        jump_cap: sc.jump_cap(),
        total_jumps: paths.iter().map(|p| p.jump_count()).sum(),
        total_candidates: paths.iter().map(|p| p.events.len()).sum(),
        total_solver_steps: paths.iter().map(|p| p.solver_steps).sum(),
        config: config.clone(),
    };

    fs::create_dir_all(out_dir)?;
    let contents = [
        paths_csv(&paths, &sc.family)?,
        events_csv(&paths),
        scatter_csv(&paths, &sc.family, &times)?,
        fluxcurves_csv(&sc.family, &built.flux_curve_alphas)?,
        toml::to_string(&meta).map_err(|e| crate::Error::ConfigParse(e.to_string()))?,
    ];
    let mut files = Vec::new();
    for (name, text) in ARTIFACTS.iter().zip(contents) {
        let path = out_dir.join(name);
        fs::write(&path, text)?;
        files.push(path);
    }
    Ok(RunSummary { meta, files })
}
