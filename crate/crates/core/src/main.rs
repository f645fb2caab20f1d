use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use pdmp_scl::output::{self, fluxcurves_csv};
use pdmp_scl::scenario::{builtin_scenario, ScenarioConfig, BUILTIN_NAMES};

#[derive(Parser)]
#[command(name = "pdmp-scl", version, about = "Conservation laws with randomly switching fluxes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an ensemble and write CSV artifacts.
    Run {
        /// Built-in scenario name or path to a TOML file.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the grid spacing.
        #[arg(long)]
        dx: Option<f64>,
        #[arg(long)]
        cfl: Option<f64>,
        #[arg(long)]
        initial_alpha: Option<f64>,
        /// Worker threads (default: all cores). Output does not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the built-in scenario names.
    ListScenarios,
    /// Print a scenario (built-in or file) as TOML.
    Show { scenario: String },
    /// Check a scenario file and report every problem found.
    Validate { path: PathBuf },
    /// Tabulate flux members for the given parameters.
    FluxCurves {
        #[arg(long)]
        scenario: String,
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(name_or_path: &str) -> Result<ScenarioConfig> {
    if BUILTIN_NAMES.contains(&name_or_path) {
        return Ok(builtin_scenario(name_or_path)?);
    }
    let path = Path::new(name_or_path);
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("`{name_or_path}` is neither a built-in scenario nor a readable file"))?;
    Ok(ScenarioConfig::from_toml(&text)?)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            scenario,
            seed,
            samples,
            out,
            dx,
            cfl,
            initial_alpha,
            threads,
        } => {
            let mut config = load(&scenario)?;
            if let Some(dx) = dx {
                config.set_dx(dx);
            }
            if let Some(cfl) = cfl {
                config.cfl_number = cfl;
            }
            if initial_alpha.is_some() {
                config.initial_alpha = initial_alpha;
            }
            let summary = output::run(&config, seed, samples, &out, threads)?;
            let m = &summary.meta;
            println!(
                "{}: {} paths, {} jumps, {} candidates, truncated tail mass {:.4} ({:.2}%)",
                m.scenario_id,
                m.n_samples,
                m.total_jumps,
                m.total_candidates,
                m.truncated_tail_mass,
                100.0 * m.truncated_tail_fraction
            );
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
        }
        Command::ListScenarios => {
            for name in BUILTIN_NAMES {
                println!("{name}");
            }
        }
        Command::Show { scenario } => print!("{}", load(&scenario)?.to_toml()?),
        Command::Validate { path } => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            ScenarioConfig::from_toml(&text)?.validate()?;
            println!("{}: ok", path.display());
        }
        Command::FluxCurves { scenario, alphas, out } => {
            let built = load(&scenario)?.build()?;
            let alphas = if alphas.is_empty() { built.flux_curve_alphas.clone() } else { alphas };
            std::fs::write(&out, fluxcurves_csv(&built.scenario.family, &alphas)?)
                .with_context(|| format!("writing {}", out.display()))?;
        }
    }
    Ok(())
}
