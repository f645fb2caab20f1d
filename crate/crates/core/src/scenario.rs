//! Scenario configuration: the TOML schema, the built-in production and
//! traffic scenarios, and validation into a runnable [`Scenario`].

use serde::{Deserialize, Serialize};

use crate::engine::Scenario;
use crate::error::{Error, Result};
use crate::flux::{BaseFlux, FluxFamily, WorkingRange};
use crate::godunov::CflConfig;
use crate::grid::{Grid, GridFunction};
use crate::kernel::{ConstantKernelParams, ProductionKernelParams, RateKernel, TrafficKernelParams};

pub const BUILTIN_NAMES: [&str; 3] = ["production", "traffic-free", "traffic-congested"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseFluxConfig {
    Identity,
    Burgers,
    Greenshields,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FluxConfig {
    Scaled {
        base: BaseFluxConfig,
        /// `[u, f(u)]` nodes, only for `base = "tabulated"`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<Vec<[f64; 2]>>,
    },
    PiecewiseMin {
        velocity: f64,
        capacity: f64,
    },
    ProductionExp,
    TrafficGamma {
        theta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    ProductionGaussian {
        window_a: f64,
        window_b: f64,
        lambda_0: f64,
        lambda_1: f64,
        center: f64,
        variance: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda_max: Option<f64>,
    },
    TrafficUniform {
        lambda_0: f64,
        lambda_1: f64,
        center: f64,
        half_width_scale: f64,
    },
    ConstantTest {
        rate: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda_max: Option<f64>,
        target_lo: f64,
        target_hi: f64,
    },
}

/// Built-in initial profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `(offset + amplitude·s(x))·exp(−|x|/decay_length)` with
    /// `s = max(sin x, 0)` if `positive_part`, else `s = sin x`.
    SineDecay {
        offset: f64,
        amplitude: f64,
        positive_part: bool,
        decay_length: f64,
    },
    /// `left` for `x < position`, `right` otherwise.
    Riemann { left: f64, right: f64, position: f64 },
    Constant { value: f64 },
}

impl InitialCondition {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            InitialCondition::SineDecay {
                offset,
                amplitude,
                positive_part,
                decay_length,
            } => {
                let s = if positive_part { x.sin().max(0.0) } else { x.sin() };
                (offset + amplitude * s) * (-x.abs() / decay_length).exp()
            }
            InitialCondition::Riemann { left, right, position } => {
                if x < position {
                    left
                } else {
                    right
                }
            }
            InitialCondition::Constant { value } => value,
        }
    }

    /// `∫ |u₀|` over `ℝ \ [x_min, x_max]`.
    pub fn truncated_mass(&self, x_min: f64, x_max: f64) -> f64 {
        match *self {
            InitialCondition::SineDecay { decay_length, .. } => {
                let reach = 60.0 * decay_length;
                simpson(|x| self.eval(x).abs(), x_max, x_max + reach)
                    + simpson(|x| self.eval(x).abs(), x_min - reach, x_min)
            }
            InitialCondition::Riemann { left, right, .. } => {
                if left == 0.0 && right == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            InitialCondition::Constant { value } => {
                if value == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn issues(&self) -> Vec<String> {
        let values: Vec<f64> = match *self {
            InitialCondition::SineDecay {
                offset,
                amplitude,
                decay_length,
                ..
            } => {
                let mut v = vec![offset, amplitude];
                if !(decay_length > 0.0) {
                    return vec![format!("decay_length must be > 0, got {decay_length}")];
                }
                v.push(decay_length);
                v
            }
            InitialCondition::Riemann { left, right, position } => vec![left, right, position],
            InitialCondition::Constant { value } => vec![value],
        };
        if values.iter().all(|v| v.is_finite()) {
            vec![]
        } else {
            vec!["initial condition parameters must be finite".into()]
        }
    }
}

fn note(issues: &mut Vec<String>, r: Result<()>) {
    if let Err(e) = r {
        issues.push(match e {
            Error::Parameter(m) => m,
            e => e.to_string(),
        })
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let n = ((b - a) / 0.01).ceil() as usize * 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario_id: String,
    pub horizon: f64,
    pub snapshot_interval: f64,
    pub cfl_number: f64,
    pub probes: Vec<f64>,
    /// Defaults to the kernel center.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_alpha: Option<f64>,
    /// Parameters tabulated into `fluxcurves.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux_curve_alphas: Option<Vec<f64>>,
    pub grid: GridConfig,
    pub flux: FluxConfig,
    pub kernel: KernelConfig,
    pub initial_condition: InitialCondition,
}

/// A validated scenario plus the facts recorded in run metadata.
#[derive(Debug, Clone)]
pub struct BuiltScenario {
    pub scenario: Scenario,
    pub truncated_mass: f64,
    pub flux_curve_alphas: Vec<f64>,
}

const DEFAULT_GRID: GridConfig = GridConfig {
    x_min: -200.0,
    x_max: 200.0,
    n_cells: 8000,
};

fn traffic(id: &str, offset: f64, amplitude: f64) -> ScenarioConfig {
    ScenarioConfig {
        scenario_id: id.into(),
        horizon: 50.0,
        snapshot_interval: 0.1,
        cfl_number: 0.5,
        probes: vec![0.0, 1.0],
        initial_alpha: None,
        flux_curve_alphas: Some(vec![0.3, 0.35, 0.4, 0.45, 0.5]),
        grid: DEFAULT_GRID,
        flux: FluxConfig::TrafficGamma { theta: 2.1 },
        kernel: KernelConfig::TrafficUniform {
            lambda_0: 3.0,
            lambda_1: 10.0,
            center: 0.4,
            half_width_scale: 9.0 / 2000.0,
        },
        initial_condition: InitialCondition::SineDecay {
            offset,
            amplitude,
            positive_part: true,
            decay_length: 100.0,
        },
    }
}

pub fn builtin_scenario(name: &str) -> Result<ScenarioConfig> {
    match name {
        "production" => Ok(ScenarioConfig {
            scenario_id: "production".into(),
            horizon: 50.0,
            snapshot_interval: 0.2,
            cfl_number: 0.5,
            probes: vec![0.0],
            initial_alpha: None,
            flux_curve_alphas: Some(vec![-1.0, -0.5, 0.0, 0.5, 1.0]),
            grid: DEFAULT_GRID,
            flux: FluxConfig::ProductionExp,
            kernel: KernelConfig::ProductionGaussian {
                window_a: 0.0,
                window_b: 1.0,
                lambda_0: 5.0,
                lambda_1: 1.0,
                center: 0.0,
                variance: 1e-2,
                lambda_max: None,
            },
            initial_condition: InitialCondition::SineDecay {
                offset: 1.5,
                amplitude: 1.5,
                positive_part: false,
                decay_length: 100.0,
            },
        }),
        "traffic-free" => Ok(traffic("traffic-free", 0.05, 0.4)),
        "traffic-congested" => Ok(traffic("traffic-congested", 0.4, 1.0)),
        other => Err(Error::UnknownScenario(other.into())),
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    /// Replace the cell count so that the spacing is as close to `dx` as
    /// possible.
    pub fn set_dx(&mut self, dx: f64) {
        let n = ((self.grid.x_max - self.grid.x_min) / dx).round();
        self.grid.n_cells = if n.is_finite() && n >= 0.0 { n as usize } else { 0 };
    }

    fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.x_min, self.grid.x_max, self.grid.n_cells)
    }

    fn family(&self, range: WorkingRange) -> Result<FluxFamily> {
        match &self.flux {
            FluxConfig::Scaled { base, table } => {
                let base = match (base, table) {
                    (BaseFluxConfig::Identity, None) => BaseFlux::Identity,
                    (BaseFluxConfig::Burgers, None) => BaseFlux::Burgers,
                    (BaseFluxConfig::Greenshields, None) => BaseFlux::Greenshields,
                    (BaseFluxConfig::Tabulated, Some(t)) => {
                        BaseFlux::Tabulated(t.iter().map(|p| (p[0], p[1])).collect())
                    }
                    (BaseFluxConfig::Tabulated, None) => {
                        return Err(Error::Parameter("tabulated base needs a `table`".into()))
                    }
                    (_, Some(_)) => {
                        return Err(Error::Parameter("`table` is only valid for base = tabulated".into()))
                    }
                };
                FluxFamily::scaled(base, range)
            }
            FluxConfig::PiecewiseMin { velocity, capacity } => {
                FluxFamily::piecewise_min(*velocity, *capacity, range)
            }
            FluxConfig::ProductionExp => Ok(FluxFamily::production_exp(range)),
            FluxConfig::TrafficGamma { theta } => FluxFamily::traffic_gamma(*theta, range),
        }
    }

    fn kernel(&self) -> Result<RateKernel> {
        Ok(match self.kernel {
            KernelConfig::ProductionGaussian {
                window_a,
                window_b,
                lambda_0,
                lambda_1,
                center,
                variance,
                lambda_max,
            } => RateKernel::ProductionGaussian(ProductionKernelParams::new(
                (window_a, window_b),
                lambda_0,
                lambda_1,
                center,
                variance,
                lambda_max,
            )?),
            KernelConfig::TrafficUniform {
                lambda_0,
                lambda_1,
                center,
                half_width_scale,
            } => RateKernel::TrafficUniform(TrafficKernelParams::new(
                lambda_0,
                lambda_1,
                center,
                half_width_scale,
            )?),
            KernelConfig::ConstantTest {
                rate,
                lambda_max,
                target_lo,
                target_hi,
            } => RateKernel::ConstantTest(ConstantKernelParams::new(
                rate,
                lambda_max,
                (target_lo, target_hi),
            )?),
        })
    }

    /// Check every precondition and report all violations at once.
    pub fn validate(&self) -> Result<()> {
        self.build().map(|_| ())
    }

    pub fn build(&self) -> Result<BuiltScenario> {
        let mut issues = Vec::new();

        let grid = self.grid();
        note(&mut issues, grid.as_ref().map(|_| ()).map_err(Clone::clone));
        note(&mut issues, CflConfig::new(self.cfl_number).map(|_| ()));
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            note(&mut issues, Err(Error::Parameter(format!("horizon must be > 0, got {}", self.horizon))));
        } else if !(self.snapshot_interval > 0.0 && self.snapshot_interval <= self.horizon) {
            note(&mut issues, Err(Error::Parameter(format!(
                "snapshot_interval must lie in (0, horizon], got {}",
                self.snapshot_interval
            ))));
        } else {
            let k = self.horizon / self.snapshot_interval;
            if (k - k.round()).abs() > 1e-9 * k.max(1.0) {
                note(&mut issues, Err(Error::Parameter(format!(
                    "snapshot_interval {} does not divide horizon {}",
                    self.snapshot_interval, self.horizon
                ))));
            }
        }
        issues.extend(self.initial_condition.issues());

        let kernel = self.kernel();
        let kernel = match kernel {
            Ok(k) => Some(k),
            Err(e) => {
                note(&mut issues, Err(e));
                None
            }
        };

        let mut built = None;
        if let Ok(grid) = grid {
            for &x in &self.probes {
                if !grid.contains(x) {
                    issues.push(format!(
                        "probe x = {x} outside the grid [{}, {}]",
                        grid.x_min(),
                        grid.x_max()
                    ));
                }
            }
            if let Some(k) = &kernel {
                let window = match k {
                    RateKernel::ProductionGaussian(p) => Some(p.window),
                    RateKernel::TrafficUniform(_) => Some((0.0, 1.0)),
                    RateKernel::ConstantTest(_) => None,
                };
                if let Some((a, b)) = window {
                    note(&mut issues, grid.window_weights(a, b).map(|_| ()));
                }
            }
            if self.initial_condition.issues().is_empty() {
                let ic = &self.initial_condition;
                match GridFunction::from_fn(grid, |x| ic.eval(x)) {
                    Ok(u0) => {
                        let range = WorkingRange::from_data_bounds(u0.min(), u0.max());
                        match range.and_then(|r| self.family(r)) {
                            Ok(family) => built = Some((family, u0)),
                            Err(e) => note(&mut issues, Err(e)),
                        }
                    }
                    Err(e) => note(&mut issues, Err(e)),
                }
            }
        }

        let mut initial_alpha = None;
        if let (Some((family, _)), Some(kernel)) = (&built, &kernel) {
            let domain = family.domain();
            let alpha = self.initial_alpha.unwrap_or_else(|| kernel.center());
            if !domain.contains(alpha) {
                issues.push(format!("initial alpha {alpha} outside the family domain {domain}"));
            }
            initial_alpha = Some(alpha);
            if let Some((lo, hi)) = kernel.support() {
                if !(domain.contains(lo) && domain.contains(hi)) {
                    issues.push(format!(
                        "post-jump support [{lo}, {hi}] leaves the family domain {domain}"
                    ));
                }
            }
            for &a in self.flux_curve_alphas.iter().flatten() {
                if !domain.contains(a) {
                    issues.push(format!("flux curve alpha {a} outside the family domain {domain}"));
                }
            }
        }

        if !issues.is_empty() {
            return Err(Error::InvalidConfig(issues));
        }
        let (family, initial) = built.expect("no issues implies a built family");
        let kernel = kernel.expect("no issues implies a kernel");
        let flux_curve_alphas = self
            .flux_curve_alphas
            .clone()
            .unwrap_or_else(|| vec![initial_alpha.expect("set with the family")]);
        Ok(BuiltScenario {
            truncated_mass: self
                .initial_condition
                .truncated_mass(self.grid.x_min, self.grid.x_max),
            flux_curve_alphas,
            scenario: Scenario {
                family,
                kernel,
                initial,
                initial_alpha: initial_alpha.expect("set with the family"),
                horizon: self.horizon,
                cfl: CflConfig::new(self.cfl_number)?,
                probes: self.probes.clone(),
                snapshot_interval: self.snapshot_interval,
            },
        })
    }
}
