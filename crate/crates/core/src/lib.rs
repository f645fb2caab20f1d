//! Piecewise-deterministic Markov processes whose deterministic part is a
//! scalar conservation law `∂ₜρ + ∂ₓ f^α(ρ) = 0`, solved with a Godunov
//! finite-volume scheme, and whose flux parameter `α` jumps at random times
//! simulated by thinning.

pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod flux;
pub mod godunov;
pub mod grid;
pub mod kernel;
pub mod output;
pub mod scenario;

pub use engine::{run_ensemble, run_ensemble_with_threads, simulate_path, PathSeed, SamplePath, Scenario};
pub use error::{Error, Result};
pub use flux::{Flux, FluxFamily, WorkingRange};
pub use godunov::{CflConfig, GodunovSolver};
pub use grid::{Grid, GridFunction};
pub use kernel::RateKernel;
pub use scenario::{builtin_scenario, ScenarioConfig};
