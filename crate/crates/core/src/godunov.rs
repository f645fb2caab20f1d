//! First-order Godunov finite-volume scheme for `u_t + f^α(u)_x = 0`.
//!
//! The interface flux is the exact Riemann flux of a scalar law:
//! `min f` over `[u_l, u_r]` when `u_l ≤ u_r`, `max f` over `[u_r, u_l]`
//! otherwise. It is evaluated in closed form from the member's
//! [`FluxShape`](crate::flux::FluxShape), so each step costs one flux
//! evaluation per cell. Boundaries are outflow (zero-order extrapolation
//! into one ghost cell on each side).

use crate::error::{Error, Result};
use crate::flux::{Flux, FluxFamily, ShapeKind};
use crate::grid::{Grid, GridFunction};

/// Relative slack accepted on the CFL bound before a step is rejected.
const CFL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflConfig {
    cfl_number: f64,
}

impl CflConfig {
    pub fn new(cfl_number: f64) -> Result<Self> {
        if !(cfl_number > 0.0 && cfl_number <= 1.0) {
            return Err(Error::Parameter(format!(
                "cfl number must lie in (0, 1], got {cfl_number}"
            )));
        }
        Ok(Self { cfl_number })
    }

    pub fn cfl_number(&self) -> f64 {
        self.cfl_number
    }
}

impl Default for CflConfig {
    fn default() -> Self {
        Self { cfl_number: 0.5 }
    }
}

/// Godunov flux from the two states and their flux values; `f_crit` is
/// `f(ρ*)` for unimodal and valley shapes.
#[inline]
fn riemann_flux(kind: ShapeKind, crit: f64, f_crit: f64, ul: f64, fl: f64, ur: f64, fr: f64) -> f64 {
    match kind {
        ShapeKind::MonotoneIncreasing => fl,
        ShapeKind::MonotoneDecreasing => fr,
        ShapeKind::Unimodal => {
            if ul <= ur {
                fl.min(fr)
            } else if ur <= crit && crit <= ul {
                f_crit
            } else {
                fl.max(fr)
            }
        }
        ShapeKind::Valley => {
            if ul > ur {
                fl.max(fr)
            } else if ul <= crit && crit <= ur {
                f_crit
            } else {
                fl.min(fr)
            }
        }
    }
}

/// Godunov interface flux for a single member `f^α`.
pub fn godunov_flux(flux: &Flux<'_>, u_l: f64, u_r: f64) -> f64 {
    let shape = flux.shape();
    let crit = shape.critical_density.unwrap_or(f64::NAN);
    let f_crit = if crit.is_nan() { f64::NAN } else { flux.value(crit) };
    riemann_flux(shape.kind, crit, f_crit, u_l, flux.value(u_l), u_r, flux.value(u_r))
}

pub fn godunov_numerical_flux(family: &FluxFamily, alpha: f64, u_l: f64, u_r: f64) -> Result<f64> {
    Ok(godunov_flux(&family.member(alpha)?, u_l, u_r))
}

/// `cfl·dx / L`, or `horizon` when the flux is flat (`L = 0`).
pub fn cfl_timestep(flux: &Flux<'_>, cfl: CflConfig, grid: &Grid, horizon: f64) -> f64 {
    let lip = flux.lipschitz();
    if lip > 0.0 {
        cfl.cfl_number() * grid.dx() / lip
    } else {
        horizon
    }
}

/// Outflow-boundary interface fluxes `(F_{1/2}, F_{N+1/2})`.
pub fn boundary_fluxes(u: &GridFunction, flux: &Flux<'_>) -> (f64, f64) {
    let v = u.values();
    (flux.value(v[0]), flux.value(v[v.len() - 1]))
}

/// Bookkeeping of one [`GodunovSolver::advance`] call.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Advance {
    pub steps: usize,
    /// `∫ (F_right − F_left) dt`: mass that left the domain.
    pub outflow: f64,
}

/// Reusable solver with scratch buffers; one per sample path.
#[derive(Debug, Clone)]
pub struct GodunovSolver {
    grid: Grid,
    cfl: CflConfig,
    cell_flux: Vec<f64>,
    interface_flux: Vec<f64>,
}

impl GodunovSolver {
    pub fn new(grid: Grid, cfl: CflConfig) -> Self {
        Self {
            grid,
            cfl,
            cell_flux: vec![0.0; grid.n_cells()],
            interface_flux: vec![0.0; grid.n_cells() + 1],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cfl(&self) -> CflConfig {
        self.cfl
    }

    /// One explicit step of length `dt` in place. Returns the boundary
    /// outflow `dt·(F_{N+1/2} − F_{1/2})`.
    pub fn step_in_place(&mut self, values: &mut [f64], flux: &Flux<'_>, dt: f64) -> Result<f64> {
        let n = self.grid.n_cells();
        if values.len() != n {
            return Err(Error::GridMismatch(format!("{} values for {n} cells", values.len())));
        }
        let bound = cfl_timestep(flux, self.cfl, &self.grid, f64::INFINITY);
        if dt > bound * (1.0 + CFL_SLACK) {
            return Err(Error::CflViolation { dt, bound });
        }

        let shape = flux.shape();
        let crit = shape.critical_density.unwrap_or(f64::NAN);
        let f_crit = if crit.is_nan() { f64::NAN } else { flux.value(crit) };

        for (fc, &u) in self.cell_flux.iter_mut().zip(values.iter()) {
            *fc = flux.value(u);
        }
        let fx = &mut self.interface_flux;
        fx[0] = self.cell_flux[0];
        fx[n] = self.cell_flux[n - 1];
        for i in 1..n {
            fx[i] = riemann_flux(
                shape.kind,
                crit,
                f_crit,
                values[i - 1],
                self.cell_flux[i - 1],
                values[i],
                self.cell_flux[i],
            );
        }

        let ratio = dt / self.grid.dx();
        let mut finite = true;
        for (i, u) in values.iter_mut().enumerate() {
            *u -= ratio * (fx[i + 1] - fx[i]);
            finite &= u.is_finite();
        }
        if !finite {
            return Err(Error::NonFiniteState {
                time: f64::NAN,
                step: 0,
                alpha: flux.alpha(),
            });
        }
        Ok(dt * (fx[n] - fx[0]))
    }

    /// Evolve in place for exactly `duration`: full CFL steps followed by one
    /// shortened step that lands on `duration`.
    pub fn advance(&mut self, values: &mut [f64], flux: &Flux<'_>, duration: f64) -> Result<Advance> {
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::Parameter(format!("duration must be >= 0, got {duration}")));
        }
        let mut report = Advance::default();
        if duration == 0.0 {
            return Ok(report);
        }
        let dt = cfl_timestep(flux, self.cfl, &self.grid, duration).min(duration);
        // n steps: n−1 of length dt, the last one takes what is left
        let n = (duration / dt - 1e-12).ceil().max(1.0) as usize;
        for k in 0..n {
            let h = if k + 1 == n { duration - (n - 1) as f64 * dt } else { dt };
            match self.step_in_place(values, flux, h) {
                Ok(out) => report.outflow += out,
                Err(Error::NonFiniteState { alpha, .. }) => {
                    return Err(Error::NonFiniteState {
                        time: k as f64 * dt + h,
                        step: k,
                        alpha,
                    })
                }
                Err(e) => return Err(e),
            }
        }
        report.steps = n;
        Ok(report)
    }
}

/// One Godunov step of length `dt`; rejects steps above the CFL bound.
pub fn step(u: &GridFunction, flux: &Flux<'_>, dt: f64, cfl: CflConfig) -> Result<GridFunction> {
    let mut solver = GodunovSolver::new(*u.grid(), cfl);
    let mut next = u.clone();
    solver.step_in_place(next.values_mut(), flux, dt)?;
    Ok(next)
}

/// `S_t^α u` for `t = duration`.
pub fn evolve(u: &GridFunction, flux: &Flux<'_>, duration: f64, cfl: CflConfig) -> Result<GridFunction> {
    let mut solver = GodunovSolver::new(*u.grid(), cfl);
    let mut next = u.clone();
    solver.advance(next.values_mut(), flux, duration)?;
    Ok(next)
}

/// Position where a monotone front crosses `level`, linearly interpolated
/// between cell centers. Returns the first crossing from the left.
pub fn front_position(u: &GridFunction, level: f64) -> Option<f64> {
    let v = u.values();
    let g = u.grid();
    (1..v.len()).find_map(|i| {
        let (a, b) = (v[i - 1] - level, v[i] - level);
        if a == 0.0 {
            Some(g.center(i - 1))
        } else if a * b < 0.0 || b == 0.0 {
            let s = a / (a - b);
            Some(g.center(i - 1) + s * g.dx())
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{l1_distance, tv};
    use crate::flux::{BaseFlux, WorkingRange};

    fn range(hi: f64) -> WorkingRange {
        WorkingRange::new(0.0, hi).unwrap()
    }

    #[test]
    fn consistency_on_equal_states() {
        let fam = FluxFamily::traffic_gamma(2.1, range(1.5)).unwrap();
        for u in [0.0, 0.1, 0.4, 0.9] {
            let f = fam.eval(0.4, u).unwrap();
            assert_eq!(godunov_numerical_flux(&fam, 0.4, u, u).unwrap(), f);
        }
    }

    #[test]
    fn increasing_flux_takes_left_state() {
        let fam = FluxFamily::production_exp(range(3.0));
        assert_eq!(godunov_numerical_flux(&fam, 0.0, 0.0, 2.0).unwrap(), 0.0);
        let f1 = fam.eval(0.0, 1.5).unwrap();
        assert_eq!(godunov_numerical_flux(&fam, 0.0, 1.5, 0.2).unwrap(), f1);
    }

    #[test]
    fn sonic_point_inside_fan() {
        let fam = FluxFamily::traffic_gamma(2.1, range(1.5)).unwrap();
        let peak = fam.eval(0.4, 0.4).unwrap();
        assert_eq!(godunov_numerical_flux(&fam, 0.4, 1.0, 0.1).unwrap(), peak);
        assert!((peak - 0.569).abs() < 5e-4);
        // shock between states on either side of ρ*: min of the endpoint fluxes
        let (f1, f2) = (fam.eval(0.4, 0.1).unwrap(), fam.eval(0.4, 1.0).unwrap());
        assert_eq!(godunov_numerical_flux(&fam, 0.4, 0.1, 1.0).unwrap(), f1.min(f2));
    }

    #[test]
    fn godunov_flux_matches_brute_force_extremum() {
        let fams = [
            (FluxFamily::scaled(BaseFlux::Burgers, WorkingRange::new(-1.0, 1.0).unwrap()).unwrap(), 1.0),
            (FluxFamily::scaled(BaseFlux::Greenshields, range(1.0)).unwrap(), -1.0),
            (FluxFamily::scaled(BaseFlux::Greenshields, range(1.0)).unwrap(), 1.0),
            (FluxFamily::traffic_gamma(2.1, range(1.5)).unwrap(), 0.35),
        ];
        let states: [f64; 8] = [-0.6, -0.1, 0.0, 0.2, 0.35, 0.5, 0.7, 1.0];
        for (fam, alpha) in &fams {
            let f = fam.member(*alpha).unwrap();
            for &ul in &states {
                for &ur in &states {
                    let (lo, hi) = (ul.min(ur), ul.max(ur));
                    let vals = (0..=4000).map(|k| f.value(lo + (hi - lo) * k as f64 / 4000.0));
                    let brute = if ul <= ur {
                        vals.fold(f64::INFINITY, f64::min)
                    } else {
                        vals.fold(f64::NEG_INFINITY, f64::max)
                    };
                    let got = godunov_flux(&f, ul, ur);
                    assert!((got - brute).abs() < 1e-6, "{:?} α={alpha} ({ul},{ur}): {got} vs {brute}", fam.kind());
                }
            }
        }
    }

    #[test]
    fn timestep_formula() {
        let fam = FluxFamily::scaled(BaseFlux::Identity, range(1.0)).unwrap();
        let grid = Grid::new(0.0, 1.0, 20).unwrap();
        let f = fam.member(2.0).unwrap();
        let dt = cfl_timestep(&f, CflConfig::new(0.5).unwrap(), &grid, 10.0);
        assert!((dt - 0.0125).abs() < 1e-15);
        let grid = Grid::new(0.0, 1.0, 10).unwrap();
        let f = fam.member(1.0).unwrap();
        assert!((cfl_timestep(&f, CflConfig::new(1.0).unwrap(), &grid, 10.0) - 0.1).abs() < 1e-15);
        let flat = fam.member(0.0).unwrap();
        assert_eq!(cfl_timestep(&flat, CflConfig::default(), &grid, 7.5), 7.5);
    }

    #[test]
    fn cfl_config_bounds() {
        assert!(CflConfig::new(0.0).is_err());
        assert!(CflConfig::new(1.5).is_err());
        assert_eq!(CflConfig::default().cfl_number(), 0.5);
    }

    #[test]
    fn step_rejects_cfl_violation() {
        let fam = FluxFamily::production_exp(range(2.0));
        let f = fam.member(0.0).unwrap();
        let grid = Grid::new(0.0, 1.0, 10).unwrap();
        let u = GridFunction::constant(grid, 1.0).unwrap();
        assert!(matches!(
            step(&u, &f, 0.2, CflConfig::default()),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn constant_state_is_stationary() {
        let fam = FluxFamily::traffic_gamma(2.1, range(1.5)).unwrap();
        let f = fam.member(0.4).unwrap();
        let grid = Grid::new(-1.0, 1.0, 50).unwrap();
        let u = GridFunction::constant(grid, 0.7).unwrap();
        let v = evolve(&u, &f, 1.3, CflConfig::default()).unwrap();
        assert_eq!(u, v);
    }

    #[test]
    fn evolve_zero_is_identity() {
        let fam = FluxFamily::production_exp(range(2.0));
        let f = fam.member(0.3).unwrap();
        let grid = Grid::new(-1.0, 1.0, 50).unwrap();
        let u = GridFunction::from_fn(grid, |x| 1.0 + x.sin()).unwrap();
        assert_eq!(evolve(&u, &f, 0.0, CflConfig::default()).unwrap(), u);
    }

    #[test]
    fn unit_cfl_linear_advection_is_a_shift() {
        let fam = FluxFamily::scaled(BaseFlux::Identity, range(2.0)).unwrap();
        let f = fam.member(1.0).unwrap();
        let grid = Grid::new(0.0, 1.0, 40).unwrap();
        let u = GridFunction::from_fn(grid, |x| if (0.2..0.4).contains(&x) { 1.0 + x } else { 0.1 }).unwrap();
        let v = step(&u, &f, grid.dx(), CflConfig::new(1.0).unwrap()).unwrap();
        for i in 1..grid.n_cells() {
            assert!((v.values()[i] - u.values()[i - 1]).abs() <= 1e-15);
        }
    }

    #[test]
    fn semigroup_on_aligned_durations() {
        let fam = FluxFamily::production_exp(range(3.0));
        let f = fam.member(0.0).unwrap();
        let grid = Grid::new(-5.0, 5.0, 200).unwrap();
        let cfl = CflConfig::default();
        let u = GridFunction::from_fn(grid, |x| 1.5 * (x.sin() + 1.0)).unwrap();
        let dt = cfl_timestep(&f, cfl, &grid, 1.0);
        let (s, t) = (7.0 * dt, 12.0 * dt);
        let split = evolve(&evolve(&u, &f, s, cfl).unwrap(), &f, t, cfl).unwrap();
        let joint = evolve(&u, &f, s + t, cfl).unwrap();
        assert!(l1_distance(&split, &joint).unwrap() <= 1e-12);
    }

    #[test]
    fn semigroup_on_unaligned_durations() {
        // A split inside a CFL step replaces one step by two shorter ones;
        // both stay within L·TV·dt of the common start, so the gap is
        // bounded by 2·L·TV(u0)·dt.
        let fam = FluxFamily::production_exp(range(3.0));
        let f = fam.member(0.0).unwrap();
        let grid = Grid::new(-5.0, 5.0, 200).unwrap();
        let cfl = CflConfig::default();
        let u = GridFunction::from_fn(grid, |x| 1.5 * (x.sin() + 1.0)).unwrap();
        let dt = cfl_timestep(&f, cfl, &grid, 1.0);
        let (s, t) = (0.37, 0.81);
        let split = evolve(&evolve(&u, &f, s, cfl).unwrap(), &f, t, cfl).unwrap();
        let joint = evolve(&u, &f, s + t, cfl).unwrap();
        let bound = 2.0 * f.lipschitz() * tv(&u) * dt;
        assert!(l1_distance(&split, &joint).unwrap() <= bound);
    }

    #[test]
    fn time_regularity() {
        // ‖S_t u − S_s u‖ ≤ L·TV(u₀)·|t − s| with factor-2 slack at dx = 0.01
        let fam = FluxFamily::production_exp(range(3.0));
        let f = fam.member(0.3).unwrap();
        let grid = Grid::new(-10.0, 10.0, 2000).unwrap();
        let cfl = CflConfig::default();
        let u = GridFunction::from_fn(grid, |x| 1.0 + (x.sin() * (-x * x / 20.0).exp())).unwrap();
        let tv0 = tv(&u);
        for (s, t) in [(0.0, 0.1), (0.25, 0.5), (0.4, 1.0)] {
            let a = evolve(&u, &f, s, cfl).unwrap();
            let b = evolve(&u, &f, t, cfl).unwrap();
            assert!(l1_distance(&a, &b).unwrap() <= 2.0 * f.lipschitz() * tv0 * (t - s));
        }
    }

    #[test]
    fn front_position_interpolates() {
        let grid = Grid::new(0.0, 4.0, 4).unwrap();
        let u = GridFunction::new(grid, vec![0.0, 0.0, 2.0, 2.0]).unwrap();
        assert_eq!(front_position(&u, 1.0), Some(2.0));
    }
}
