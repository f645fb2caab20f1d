//! Sample paths of the hybrid process `X(t) = (α(t), u(t))` by thinning.
//!
//! Between candidate times the density follows the Godunov flow of the
//! current flux `f^α`. Candidates arrive as a Poisson process with the
//! kernel's uniform bound `λ^max`; a candidate at `τ` is accepted with
//! probability `ψ(α, τ, u(τ)) / λ^max`, after which `α` is redrawn from the
//! post-jump law. Jumps never touch `u`.
//!
//! Per path, random numbers are consumed in a fixed order: one exponential
//! gap, then (if the candidate falls inside the horizon) one acceptance
//! uniform, then (if accepted) the post-jump draw. Path `k` of an ensemble
//! with base seed `s` uses `ChaCha8Rng::seed_from_u64(s)` switched to stream
//! `k`, so paths are independent of execution order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flux::FluxFamily;
use crate::godunov::{CflConfig, GodunovSolver};
use crate::grid::GridFunction;
use crate::kernel::RateKernel;

/// Everything a path needs, already validated.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub family: FluxFamily,
    pub kernel: RateKernel,
    pub initial: GridFunction,
    pub initial_alpha: f64,
    pub horizon: f64,
    pub cfl: CflConfig,
    pub probes: Vec<f64>,
    pub snapshot_interval: f64,
}

impl Scenario {
    /// Scheduled snapshot times `0, Δ, 2Δ, …, T`; the last one is `T` exactly.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let k = (self.horizon / self.snapshot_interval).round() as usize;
        (0..=k)
            .map(|i| if i == k { self.horizon } else { i as f64 * self.snapshot_interval })
            .collect()
    }

    /// Upper bound on the number of accepted jumps before a path aborts.
    pub fn jump_cap(&self) -> usize {
        ((100.0 * self.kernel.lambda_max() * self.horizon).ceil() as usize).max(100)
    }

    fn check(&self) -> Result<()> {
        let mut issues = Vec::new();
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            issues.push(format!("horizon must be > 0, got {}", self.horizon));
        }
        if !(self.snapshot_interval > 0.0 && self.snapshot_interval <= self.horizon) {
            issues.push(format!(
                "snapshot interval must lie in (0, T], got {}",
                self.snapshot_interval
            ));
        } else {
            let k = self.horizon / self.snapshot_interval;
            if (k - k.round()).abs() > 1e-9 * k.max(1.0) {
                issues.push(format!(
                    "snapshot interval {} does not divide the horizon {}",
                    self.snapshot_interval, self.horizon
                ));
            }
        }
        if !self.family.domain().contains(self.initial_alpha) {
            issues.push(format!(
                "initial alpha {} outside the family domain {}",
                self.initial_alpha,
                self.family.domain()
            ));
        }
        for &x in &self.probes {
            if !self.initial.grid().contains(x) {
                issues.push(format!("probe x = {x} outside the grid"));
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(issues))
        }
    }
}

/// Identifies a path's randomness stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PathSeed {
    pub base: u64,
    pub index: u64,
}

impl PathSeed {
    pub fn new(base: u64, index: u64) -> Self {
        Self { base, index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base);
        rng.set_stream(self.index);
        rng
    }
}

/// `(t, α, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdmpState {
    pub t: f64,
    pub alpha: f64,
    pub u: GridFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub alpha: f64,
    pub mass: f64,
    pub tv: f64,
    /// Mass that has left through the boundaries since `t = 0`.
    pub outflow: f64,
    /// Cell values at the path's probe cells, in probe order.
    pub probe_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub candidate_time: f64,
    pub accepted: bool,
    pub total_rate: f64,
    pub lambda_max: f64,
    pub acceptance_uniform: f64,
    pub alpha_before: f64,
    pub alpha_after: Option<f64>,
    pub functional_value: f64,
}

/// State of `u` on both sides of an accepted jump.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpRecord {
    pub time: f64,
    pub alpha_before: f64,
    pub alpha_after: f64,
    pub mass_before: f64,
    pub mass_after: f64,
    pub tv_before: f64,
    pub tv_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub seed: PathSeed,
    /// `T_0 = 0, T_1, …`
    pub jump_times: Vec<f64>,
    /// `α` after each entry of `jump_times` (the first is the initial α).
    pub post_jump_params: Vec<f64>,
    pub jumps: Vec<JumpRecord>,
    pub events: Vec<EventRecord>,
    pub snapshots: Vec<Snapshot>,
    pub probe_positions: Vec<f64>,
    pub probe_cells: Vec<usize>,
    pub initial_mass: f64,
    pub initial_tv: f64,
    pub final_state: PdmpState,
    pub solver_steps: usize,
}

impl SamplePath {
    pub fn sample_id(&self) -> u64 {
        self.seed.index
    }

    pub fn jump_count(&self) -> usize {
        self.jump_times.len() - 1
    }

    /// `α(t)`, right-continuous at jump times.
    pub fn alpha_at(&self, t: f64) -> f64 {
        let k = self.jump_times.partition_point(|&s| s <= t);
        self.post_jump_params[k.saturating_sub(1)]
    }

    /// Gaps between consecutive jump times, starting from `T_0 = 0`.
    pub fn inter_jump_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.jump_times.windows(2).map(|w| w[1] - w[0])
    }
}

struct PathBuilder<'a> {
    scenario: &'a Scenario,
    solver: GodunovSolver,
    state: PdmpState,
    outflow: f64,
    steps: usize,
    probe_cells: Vec<usize>,
    snapshots: Vec<Snapshot>,
}

impl PathBuilder<'_> {
    fn evolve_to(&mut self, target: f64) -> Result<()> {
        let duration = target - self.state.t;
        if duration > 0.0 {
            let flux = self.scenario.family.member(self.state.alpha)?;
            let report = self
                .solver
                .advance(self.state.u.values_mut(), &flux, duration)
                .map_err(|e| match e {
                    Error::NonFiniteState { time, step, alpha } => Error::NonFiniteState {
                        time: self.state.t + time,
                        step: self.steps + step,
                        alpha,
                    },
                    e => e,
                })?;
            self.outflow += report.outflow;
            self.steps += report.steps;
        }
        self.state.t = target;
        Ok(())
    }

    fn snapshot(&mut self) {
        let u = &self.state.u;
        self.snapshots.push(Snapshot {
            t: self.state.t,
            alpha: self.state.alpha,
            mass: u.mass(),
            tv: u.total_variation(),
            outflow: self.outflow,
            probe_values: self.probe_cells.iter().map(|&i| u.values()[i]).collect(),
        });
    }
}

/// One realization of the process on `[0, T]`.
pub fn simulate_path(scenario: &Scenario, seed: PathSeed) -> Result<SamplePath> {
    simulate_path_capped(scenario, seed, scenario.jump_cap())
}

pub(crate) fn simulate_path_capped(scenario: &Scenario, seed: PathSeed, jump_cap: usize) -> Result<SamplePath> {
    scenario.check()?;
    let grid = *scenario.initial.grid();
    let probe_cells = scenario
        .probes
        .iter()
        .map(|&x| grid.cell_containing(x).expect("probes validated"))
        .collect();
    let mut rng = seed.rng();
    let lambda_max = scenario.kernel.lambda_max();
    let gap = (lambda_max > 0.0).then(|| Exp::new(lambda_max).expect("positive rate"));
    let horizon = scenario.horizon;
    let sample_times = scenario.snapshot_times();

    let mut b = PathBuilder {
        scenario,
        solver: GodunovSolver::new(grid, scenario.cfl),
        state: PdmpState {
            t: 0.0,
            alpha: scenario.initial_alpha,
            u: scenario.initial.clone(),
        },
        outflow: 0.0,
        steps: 0,
        probe_cells,
        snapshots: Vec::with_capacity(sample_times.len()),
    };
    let mut jump_times = vec![0.0];
    let mut post_jump_params = vec![scenario.initial_alpha];
    let mut jumps = Vec::new();
    let mut events = Vec::new();
    let mut next_sample = 0;

    loop {
        let tau = match &gap {
            Some(exp) => b.state.t + exp.sample(&mut rng),
            None => f64::INFINITY,
        };
        let target = tau.min(horizon);
        while next_sample < sample_times.len() && sample_times[next_sample] < target {
            b.evolve_to(sample_times[next_sample])?;
            b.snapshot();
            next_sample += 1;
        }
        b.evolve_to(target)?;
        if tau > horizon {
            break;
        }

        let alpha_before = b.state.alpha;
        let eval = scenario.kernel.evaluate(alpha_before, tau, &b.state.u)?;
        let uniform: f64 = rng.random();
        let accepted = uniform < eval.total_rate / lambda_max;
        let mut alpha_after = None;
        if accepted {
            if jumps.len() >= jump_cap {
                return Err(Error::JumpCapExceeded { cap: jump_cap, time: tau });
            }
            let (mass_before, tv_before) = (b.state.u.mass(), b.state.u.total_variation());
            let next = scenario
                .kernel
                .sample_post_jump(alpha_before, tau, &b.state.u, &eval, &mut rng);
            b.state.alpha = next;
            jumps.push(JumpRecord {
                time: tau,
                alpha_before,
                alpha_after: next,
                mass_before,
                mass_after: b.state.u.mass(),
                tv_before,
                tv_after: b.state.u.total_variation(),
            });
            jump_times.push(tau);
            post_jump_params.push(next);
            alpha_after = Some(next);
        }
        events.push(EventRecord {
            candidate_time: tau,
            accepted,
            total_rate: eval.total_rate,
            lambda_max,
            acceptance_uniform: uniform,
            alpha_before,
            alpha_after,
            functional_value: eval.functional_value,
        });
        // a snapshot scheduled exactly at a candidate sees the post-jump α
        while next_sample < sample_times.len() && sample_times[next_sample] == tau {
            b.snapshot();
            next_sample += 1;
        }
    }
    while next_sample < sample_times.len() {
        b.evolve_to(sample_times[next_sample])?;
        b.snapshot();
        next_sample += 1;
    }

    Ok(SamplePath {
        seed,
        jump_times,
        post_jump_params,
        jumps,
        events,
        initial_mass: scenario.initial.mass(),
        initial_tv: scenario.initial.total_variation(),
        probe_positions: scenario.probes.clone(),
        probe_cells: b.probe_cells,
        snapshots: b.snapshots,
        final_state: b.state,
        solver_steps: b.steps,
    })
}

/// `n_samples` independent paths, path `k` seeded by `(base_seed, k)`.
/// Runs on the current rayon pool; output order is the sample index.
pub fn run_ensemble(scenario: &Scenario, base_seed: u64, n_samples: usize) -> Result<Vec<SamplePath>> {
    if n_samples == 0 {
        return Err(Error::Parameter("n_samples must be >= 1".into()));
    }
    (0..n_samples)
        .into_par_iter()
        .map(|k| {
            simulate_path(scenario, PathSeed::new(base_seed, k as u64)).map_err(|e| Error::Sample {
                index: k,
                source: Box::new(e),
            })
        })
        .collect()
}

/// [`run_ensemble`] on a dedicated pool with `threads` workers.
pub fn run_ensemble_with_threads(
    scenario: &Scenario,
    base_seed: u64,
    n_samples: usize,
    threads: usize,
) -> Result<Vec<SamplePath>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    pool.install(|| run_ensemble(scenario, base_seed, n_samples))
}
