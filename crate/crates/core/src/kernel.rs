//! Jump-rate kernels `λ(α, B, t, u)`, split into the total intensity
//! `ψ_t(α, u) = λ(α, I, t, u)` and the post-jump law `η_t`.
//!
//! Every kernel carries a uniform bound `lambda_max ≥ ψ`, which the path
//! simulator uses for thinning. Post-jump laws are continuous, so a jump
//! lands on the current parameter with probability zero.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// `∫_a^b ρ(x) dx` by the midpoint rule, edge cells weighted by overlap.
pub fn wip(rho: &GridFunction, a: f64, b: f64) -> Result<f64> {
    let weights = rho.grid().window_weights(a, b)?;
    let v = rho.values();
    Ok(weights.iter().map(|&(i, len)| len * v[i]).sum())
}

/// Measure of `{x ∈ [0, 1] : ρ(x) ≥ α}`, using cell averages and overlap
/// weights at the window edges.
pub fn coverage_fraction(alpha: f64, rho: &GridFunction) -> Result<f64> {
    let weights = rho.grid().window_weights(0.0, 1.0)?;
    let v = rho.values();
    let covered: f64 = weights
        .iter()
        .filter(|&&(i, _)| v[i] >= alpha)
        .map(|&(_, len)| len)
        .sum();
    Ok(covered.clamp(0.0, 1.0))
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be > 0, got {x}")))
    }
}

fn nonnegative(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be >= 0, got {x}")))
    }
}

/// Production kernel: rate `λ₀(1 − exp(−λ₁ WIP))`, post-jump law
/// `Normal(ᾱ, σ²)` independent of the current parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductionKernelParams {
    pub window: (f64, f64),
    pub rate_scale: f64,
    pub sensitivity: f64,
    pub center: f64,
    pub variance: f64,
    /// Thinning bound; defaults to `rate_scale`.
    pub lambda_max: f64,
}

impl ProductionKernelParams {
    pub fn new(
        window: (f64, f64),
        rate_scale: f64,
        sensitivity: f64,
        center: f64,
        variance: f64,
        lambda_max: Option<f64>,
    ) -> Result<Self> {
        let (a, b) = window;
        if !(a < b) {
            return Err(Error::Parameter(format!("WIP window needs a < b, got [{a}, {b}]")));
        }
        // λ₀ = 0 is allowed: the kernel then never fires
        nonnegative("lambda_0", rate_scale)?;
        positive("lambda_1", sensitivity)?;
        positive("sigma^2", variance)?;
        if !center.is_finite() {
            return Err(Error::Parameter(format!("center must be finite, got {center}")));
        }
        let lambda_max = lambda_max.unwrap_or(rate_scale);
        nonnegative("lambda_max", lambda_max)?;
        if lambda_max < rate_scale {
            return Err(Error::Parameter(format!(
                "lambda_max {lambda_max} is below the rate bound lambda_0 = {rate_scale}"
            )));
        }
        Ok(Self {
            window,
            rate_scale,
            sensitivity,
            center,
            variance,
            lambda_max,
        })
    }

    /// The configuration used for the production experiment.
    pub fn reference() -> Self {
        Self::new((0.0, 1.0), 5.0, 1.0, 0.0, 1e-2, None).expect("valid reference parameters")
    }

    /// Post-jump variance; state-independent for now.
    pub fn variance_at(&self, _rho: &GridFunction) -> f64 {
        self.variance
    }
}

pub fn production_total_rate_from_wip(params: &ProductionKernelParams, wip: f64) -> f64 {
    // 1 − e^{−x} written with exp_m1 for accuracy at small WIP
    params.rate_scale * -(-params.sensitivity * wip).exp_m1()
}

pub fn production_total_rate(params: &ProductionKernelParams, rho: &GridFunction) -> Result<f64> {
    let (a, b) = params.window;
    Ok(production_total_rate_from_wip(params, wip(rho, a, b)?))
}

pub fn sample_production_post_jump<R: Rng + ?Sized>(
    params: &ProductionKernelParams,
    rho: &GridFunction,
    rng: &mut R,
) -> f64 {
    let normal = Normal::new(params.center, params.variance_at(rho).sqrt())
        .expect("variance validated positive");
    normal.sample(rng)
}

/// Traffic kernel: rate `λ₀ + (λ₁ − λ₀)V(α, ρ)`, post-jump law uniform on
/// `[α₀ − a, α₀ + a]` with `a = sqrt(scale·(V + 1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficKernelParams {
    pub min_rate: f64,
    pub max_rate: f64,
    pub center: f64,
    pub half_width_scale: f64,
}

impl TrafficKernelParams {
    pub fn new(min_rate: f64, max_rate: f64, center: f64, half_width_scale: f64) -> Result<Self> {
        nonnegative("lambda_0", min_rate)?;
        positive("lambda_1", max_rate)?;
        if min_rate > max_rate {
            return Err(Error::Parameter(format!(
                "lambda_0 = {min_rate} exceeds lambda_1 = {max_rate}"
            )));
        }
        positive("half_width_scale", half_width_scale)?;
        let params = Self {
            min_rate,
            max_rate,
            center,
            half_width_scale,
        };
        if !(center - params.max_half_width() > 0.0) {
            return Err(Error::Parameter(format!(
                "alpha_0 - a_max = {} must be > 0",
                center - params.max_half_width()
            )));
        }
        Ok(params)
    }

    pub fn reference() -> Self {
        Self::new(3.0, 10.0, 0.4, 9.0 / 2000.0).expect("valid reference parameters")
    }

    pub fn half_width(&self, coverage: f64) -> f64 {
        (self.half_width_scale * (coverage + 1.0)).sqrt()
    }

    /// `a_max = sqrt(2·scale)`, the half-width at full coverage.
    pub fn max_half_width(&self) -> f64 {
        self.half_width(1.0)
    }

    /// Support `[α₀ − a_max, α₀ + a_max]` of every post-jump draw.
    pub fn support(&self) -> (f64, f64) {
        let a = self.max_half_width();
        (self.center - a, self.center + a)
    }
}

pub fn traffic_total_rate_from_coverage(params: &TrafficKernelParams, coverage: f64) -> f64 {
    params.min_rate + (params.max_rate - params.min_rate) * coverage
}

pub fn traffic_total_rate(params: &TrafficKernelParams, alpha: f64, rho: &GridFunction) -> Result<f64> {
    Ok(traffic_total_rate_from_coverage(params, coverage_fraction(alpha, rho)?))
}

pub fn sample_traffic_post_jump_with_coverage<R: Rng + ?Sized>(
    params: &TrafficKernelParams,
    coverage: f64,
    rng: &mut R,
) -> f64 {
    let a = params.half_width(coverage);
    let z: f64 = rng.random();
    params.center - a + 2.0 * a * z
}

pub fn sample_traffic_post_jump<R: Rng + ?Sized>(
    params: &TrafficKernelParams,
    alpha: f64,
    rho: &GridFunction,
    rng: &mut R,
) -> Result<f64> {
    let v = coverage_fraction(alpha, rho)?;
    Ok(sample_traffic_post_jump_with_coverage(params, v, rng))
}

/// Constant rate with a uniform post-jump law; for checking the thinning
/// machinery against Poisson-process statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantKernelParams {
    pub rate: f64,
    pub lambda_max: f64,
    pub target: (f64, f64),
}

impl ConstantKernelParams {
    pub fn new(rate: f64, lambda_max: Option<f64>, target: (f64, f64)) -> Result<Self> {
        nonnegative("rate", rate)?;
        let lambda_max = lambda_max.unwrap_or(rate);
        if !(lambda_max >= rate && lambda_max.is_finite()) {
            return Err(Error::Parameter(format!(
                "lambda_max {lambda_max} is below the rate {rate}"
            )));
        }
        if !(target.0 < target.1) {
            return Err(Error::Parameter(format!(
                "post-jump interval needs lo < hi, got [{}, {}]",
                target.0, target.1
            )));
        }
        Ok(Self {
            rate,
            lambda_max,
            target,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelId {
    ProductionGaussian,
    TrafficUniform,
    ConstantTest,
}

/// Total intensity at a state plus the functional it was derived from
/// (WIP, V, or 0 for the constant kernel).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEvaluation {
    pub total_rate: f64,
    pub functional_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RateKernel {
    ProductionGaussian(ProductionKernelParams),
    TrafficUniform(TrafficKernelParams),
    ConstantTest(ConstantKernelParams),
}

impl RateKernel {
    pub fn id(&self) -> KernelId {
        match self {
            RateKernel::ProductionGaussian(_) => KernelId::ProductionGaussian,
            RateKernel::TrafficUniform(_) => KernelId::TrafficUniform,
            RateKernel::ConstantTest(_) => KernelId::ConstantTest,
        }
    }

    pub fn lambda_max(&self) -> f64 {
        match self {
            RateKernel::ProductionGaussian(p) => p.lambda_max,
            RateKernel::TrafficUniform(p) => p.max_rate,
            RateKernel::ConstantTest(p) => p.lambda_max,
        }
    }

    /// Kernel center (ᾱ or α₀), used as the default initial parameter.
    pub fn center(&self) -> f64 {
        match self {
            RateKernel::ProductionGaussian(p) => p.center,
            RateKernel::TrafficUniform(p) => p.center,
            RateKernel::ConstantTest(p) => 0.5 * (p.target.0 + p.target.1),
        }
    }

    /// Interval containing every post-jump draw, if bounded.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            RateKernel::ProductionGaussian(_) => None,
            RateKernel::TrafficUniform(p) => Some(p.support()),
            RateKernel::ConstantTest(p) => Some(p.target),
        }
    }

    /// `ψ_t(α, u)`. Neither built-in kernel depends on `t`.
    pub fn evaluate(&self, alpha: f64, _t: f64, u: &GridFunction) -> Result<RateEvaluation> {
        Ok(match self {
            RateKernel::ProductionGaussian(p) => {
                let w = wip(u, p.window.0, p.window.1)?;
                RateEvaluation {
                    total_rate: production_total_rate_from_wip(p, w),
                    functional_value: w,
                }
            }
            RateKernel::TrafficUniform(p) => {
                let v = coverage_fraction(alpha, u)?;
                RateEvaluation {
                    total_rate: traffic_total_rate_from_coverage(p, v),
                    functional_value: v,
                }
            }
            RateKernel::ConstantTest(p) => RateEvaluation {
                total_rate: p.rate,
                functional_value: 0.0,
            },
        })
    }

    /// Draw from `η_t(α, u, ·)`; `eval` must come from [`RateKernel::evaluate`]
    /// at the same state.
    pub fn sample_post_jump<R: Rng + ?Sized>(
        &self,
        _alpha: f64,
        _t: f64,
        u: &GridFunction,
        eval: &RateEvaluation,
        rng: &mut R,
    ) -> f64 {
        match self {
            RateKernel::ProductionGaussian(p) => sample_production_post_jump(p, u, rng),
            RateKernel::TrafficUniform(p) => {
                sample_traffic_post_jump_with_coverage(p, eval.functional_value, rng)
            }
            RateKernel::ConstantTest(p) => {
                let z: f64 = rng.random();
                p.target.0 + (p.target.1 - p.target.0) * z
            }
        }
    }
}
