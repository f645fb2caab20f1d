//! Parametrized families of Lipschitz flux functions `α ↦ f^α`.
//!
//! A [`FluxFamily`] is immutable once built. Evaluation goes through
//! [`FluxFamily::member`], which validates `α` against the parameter domain
//! and precomputes the per-member coefficients (capacity, velocity, Gamma
//! normalization) so the solver's inner loop only pays for `exp`/`powf`.
//!
//! All norms and Lipschitz constants are taken over the family's
//! [`WorkingRange`]; the maximum principle of the solver keeps states inside
//! it.

mod gamma;

pub use gamma::{gamma, ln_gamma};

use std::fmt;

use crate::error::{Error, Result};

/// Number of sample points used for the C^{0,1} distance and norm.
pub const C01_GRID_POINTS: usize = 10_000;

/// Gamma-function arguments the traffic family accepts; `(θ−1)/α` must lie here.
pub const GAMMA_ARGUMENT_RANGE: (f64, f64) = (1.0, 20.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkingRange {
    u_min: f64,
    u_max: f64,
}

impl WorkingRange {
    pub fn new(u_min: f64, u_max: f64) -> Result<Self> {
        if !(u_min.is_finite() && u_max.is_finite() && u_min < u_max) {
            return Err(Error::Parameter(format!(
                "working range requires finite u_min < u_max, got [{u_min}, {u_max}]"
            )));
        }
        Ok(Self { u_min, u_max })
    }

    /// `[min(0, lo), hi]` inflated by 5% at the top, as used for scenario data.
    pub fn from_data_bounds(lo: f64, hi: f64) -> Result<Self> {
        let u_min = lo.min(0.0);
        let mut u_max = 1.05 * hi.max(0.0);
        if u_max <= u_min {
            u_max = u_min + 1.0;
        }
        Self::new(u_min, u_max)
    }

    pub fn u_min(&self) -> f64 {
        self.u_min
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    /// `n` equispaced points covering both endpoints.
    pub fn sample_points(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let n = n.max(2);
        let h = (self.u_max - self.u_min) / (n - 1) as f64;
        (0..n).map(move |i| {
            if i == n - 1 {
                self.u_max
            } else {
                self.u_min + h * i as f64
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    MonotoneIncreasing,
    MonotoneDecreasing,
    /// Nondecreasing up to the critical density, nonincreasing after it.
    Unimodal,
    /// Nonincreasing up to the critical density, nondecreasing after it.
    Valley,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxShape {
    pub kind: ShapeKind,
    pub critical_density: Option<f64>,
}

impl FluxShape {
    pub const INCREASING: FluxShape = FluxShape {
        kind: ShapeKind::MonotoneIncreasing,
        critical_density: None,
    };
    pub const DECREASING: FluxShape = FluxShape {
        kind: ShapeKind::MonotoneDecreasing,
        critical_density: None,
    };

    pub fn unimodal(critical_density: f64) -> Self {
        Self {
            kind: ShapeKind::Unimodal,
            critical_density: Some(critical_density),
        }
    }

    pub fn valley(critical_density: f64) -> Self {
        Self {
            kind: ShapeKind::Valley,
            critical_density: Some(critical_density),
        }
    }
}

/// Base function `f` of the scaled family `f^α = α f`.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseFlux {
    Identity,
    /// `u²/2`
    Burgers,
    /// `u(1−u)`
    Greenshields,
    /// Nondecreasing piecewise-linear interpolant through `(u, f)` nodes,
    /// extended linearly beyond the first and last node.
    Tabulated(Vec<(f64, f64)>),
}

impl BaseFlux {
    fn value(&self, u: f64) -> f64 {
        match self {
            BaseFlux::Identity => u,
            BaseFlux::Burgers => 0.5 * u * u,
            BaseFlux::Greenshields => u * (1.0 - u),
            BaseFlux::Tabulated(nodes) => {
                let i = segment_index(nodes, u);
                let (x0, y0) = nodes[i];
                let (x1, y1) = nodes[i + 1];
                y0 + (y1 - y0) * (u - x0) / (x1 - x0)
            }
        }
    }

    fn derivative(&self, u: f64) -> f64 {
        match self {
            BaseFlux::Identity => 1.0,
            BaseFlux::Burgers => u,
            BaseFlux::Greenshields => 1.0 - 2.0 * u,
            BaseFlux::Tabulated(nodes) => {
                let i = segment_index(nodes, u);
                let slope = segment_slope(nodes, i);
                // at an interior node report the larger adjacent slope
                if i > 0 && u == nodes[i].0 {
                    slope.max(segment_slope(nodes, i - 1))
                } else {
                    slope
                }
            }
        }
    }

    fn lipschitz(&self, range: &WorkingRange) -> f64 {
        let (lo, hi) = (range.u_min, range.u_max);
        match self {
            BaseFlux::Identity => 1.0,
            BaseFlux::Burgers => lo.abs().max(hi.abs()),
            BaseFlux::Greenshields => (1.0 - 2.0 * lo).abs().max((1.0 - 2.0 * hi).abs()),
            BaseFlux::Tabulated(nodes) => {
                let last = nodes.len() - 2;
                (0..=last)
                    .filter(|&i| {
                        let seg_lo = if i == 0 { f64::NEG_INFINITY } else { nodes[i].0 };
                        let seg_hi = if i == last { f64::INFINITY } else { nodes[i + 1].0 };
                        seg_hi >= lo && seg_lo <= hi
                    })
                    .map(|i| segment_slope(nodes, i).abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Shape of `α f`.
    fn scaled_shape(&self, alpha: f64) -> FluxShape {
        if alpha == 0.0 {
            return FluxShape::INCREASING;
        }
        let positive = alpha > 0.0;
        match self {
            BaseFlux::Identity | BaseFlux::Tabulated(_) => {
                if positive {
                    FluxShape::INCREASING
                } else {
                    FluxShape::DECREASING
                }
            }
            BaseFlux::Burgers => {
                if positive {
                    FluxShape::valley(0.0)
                } else {
                    FluxShape::unimodal(0.0)
                }
            }
            BaseFlux::Greenshields => {
                if positive {
                    FluxShape::unimodal(0.5)
                } else {
                    FluxShape::valley(0.5)
                }
            }
        }
    }
}

fn segment_index(nodes: &[(f64, f64)], u: f64) -> usize {
    // index i of the segment [x_i, x_{i+1}] used for u (end segments extend)
    let p = nodes.partition_point(|&(x, _)| x <= u);
    p.saturating_sub(1).min(nodes.len() - 2)
}

fn segment_slope(nodes: &[(f64, f64)], i: usize) -> f64 {
    let (x0, y0) = nodes[i];
    let (x1, y1) = nodes[i + 1];
    (y1 - y0) / (x1 - x0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    /// `f^α = α f`, `I = ℝ`.
    Scaled(BaseFlux),
    /// `f^α(ρ) = min{vρ, α μ}`, `I = [0, ∞)`; `α` scales the nominal capacity.
    PiecewiseMin { velocity: f64, capacity: f64 },
    /// `f^α(ρ) = μ(α)(1 − exp(−v(α)ρ/μ(α)))` with `μ(α) = 1 + tanh(α/2)`,
    /// `v(α) = 1 + tanh(α)`, `I = ℝ`.
    ProductionExp,
    /// Gamma-density shaped flux with maximum at `ρ* = α`.
    TrafficGamma { theta: f64 },
}

/// Closed/open parameter interval `I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterDomain {
    pub lo: f64,
    pub hi: f64,
}

impl ParameterDomain {
    pub const REAL_LINE: ParameterDomain = ParameterDomain {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn contains(&self, alpha: f64) -> bool {
        alpha.is_finite() && alpha >= self.lo && alpha <= self.hi
    }
}

impl fmt::Display for ParameterDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open_lo = if self.lo.is_finite() { "[" } else { "(" };
        let open_hi = if self.hi.is_finite() { "]" } else { ")" };
        write!(f, "{open_lo}{}, {}{open_hi}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxFamily {
    kind: FamilyKind,
    range: WorkingRange,
}

impl FluxFamily {
    pub fn scaled(base: BaseFlux, range: WorkingRange) -> Result<Self> {
        if let BaseFlux::Tabulated(nodes) = &base {
            validate_table(nodes)?;
        }
        for u in range.sample_points(1001) {
            let (y, dy) = (base.value(u), base.derivative(u));
            if !(y.is_finite() && dy.is_finite()) {
                return Err(Error::NonFiniteFlux { u });
            }
        }
        Ok(Self {
            kind: FamilyKind::Scaled(base),
            range,
        })
    }

    pub fn piecewise_min(velocity: f64, capacity: f64, range: WorkingRange) -> Result<Self> {
        if !(velocity > 0.0 && velocity.is_finite()) {
            return Err(Error::Parameter(format!("velocity must be > 0, got {velocity}")));
        }
        if !(capacity > 0.0 && capacity.is_finite()) {
            return Err(Error::Parameter(format!("capacity must be > 0, got {capacity}")));
        }
        Ok(Self {
            kind: FamilyKind::PiecewiseMin { velocity, capacity },
            range,
        })
    }

    pub fn production_exp(range: WorkingRange) -> Self {
        Self {
            kind: FamilyKind::ProductionExp,
            range,
        }
    }

    pub fn traffic_gamma(theta: f64, range: WorkingRange) -> Result<Self> {
        if !(theta >= 2.0 && theta.is_finite()) {
            return Err(Error::Parameter(format!(
                "traffic flux requires theta >= 2, got {theta}"
            )));
        }
        Ok(Self {
            kind: FamilyKind::TrafficGamma { theta },
            range,
        })
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn range(&self) -> WorkingRange {
        self.range
    }

    /// Same family over a different working range.
    pub fn with_range(&self, range: WorkingRange) -> Self {
        Self {
            kind: self.kind.clone(),
            range,
        }
    }

    pub fn domain(&self) -> ParameterDomain {
        match &self.kind {
            FamilyKind::Scaled(_) | FamilyKind::ProductionExp => ParameterDomain::REAL_LINE,
            FamilyKind::PiecewiseMin { .. } => ParameterDomain {
                lo: 0.0,
                hi: f64::INFINITY,
            },
            FamilyKind::TrafficGamma { theta } => {
                let (g_lo, g_hi) = GAMMA_ARGUMENT_RANGE;
                ParameterDomain {
                    lo: (theta - 1.0) / g_hi,
                    hi: (theta - 1.0) / g_lo,
                }
            }
        }
    }

    fn check(&self, alpha: f64) -> Result<()> {
        let domain = self.domain();
        if domain.contains(alpha) {
            Ok(())
        } else {
            Err(Error::ParameterDomain {
                alpha,
                domain: domain.to_string(),
            })
        }
    }

    /// The member `f^α` with its coefficients precomputed.
    pub fn member(&self, alpha: f64) -> Result<Flux<'_>> {
        self.check(alpha)?;
        let law = match &self.kind {
            FamilyKind::Scaled(base) => MemberLaw::Scaled { alpha, base },
            FamilyKind::PiecewiseMin { velocity, capacity } => MemberLaw::PiecewiseMin {
                velocity: *velocity,
                capacity: alpha * capacity,
            },
            FamilyKind::ProductionExp => {
                let capacity = 1.0 + (0.5 * alpha).tanh();
                let velocity = 1.0 + alpha.tanh();
                MemberLaw::ProductionExp {
                    capacity,
                    velocity,
                    decay: velocity / capacity,
                }
            }
            FamilyKind::TrafficGamma { theta } => {
                let exponent = theta - 1.0;
                let rate = exponent / alpha;
                let coefficient = (exponent.ln() - theta * alpha.ln() - ln_gamma(rate)).exp();
                MemberLaw::TrafficGamma {
                    coefficient,
                    exponent,
                    rate,
                    critical: alpha,
                }
            }
        };
        Ok(Flux {
            alpha,
            law,
            range: self.range,
        })
    }

    pub fn eval(&self, alpha: f64, u: f64) -> Result<f64> {
        Ok(self.member(alpha)?.value(u))
    }

    pub fn eval_derivative(&self, alpha: f64, u: f64) -> Result<f64> {
        Ok(self.member(alpha)?.derivative(u))
    }

    pub fn lipschitz_constant(&self, alpha: f64) -> Result<f64> {
        Ok(self.member(alpha)?.lipschitz())
    }

    /// `sup|f^α| + sup|f^α'|` over the working range, sampled on
    /// [`C01_GRID_POINTS`] points.
    pub fn c01_norm(&self, alpha: f64) -> Result<f64> {
        let f = self.member(alpha)?;
        let (mut sup, mut lip) = (0.0_f64, 0.0_f64);
        for u in self.range.sample_points(C01_GRID_POINTS) {
            sup = sup.max(f.value(u).abs());
            lip = lip.max(f.derivative(u).abs());
        }
        Ok(sup + lip)
    }

    /// `‖f^α − f^β‖_{C^{0,1}}`: sup norm of the difference plus the sup of the
    /// difference of derivatives, both sampled on [`C01_GRID_POINTS`] points.
    pub fn c01_distance(&self, alpha: f64, beta: f64) -> Result<f64> {
        let f = self.member(alpha)?;
        let g = self.member(beta)?;
        let (mut sup, mut lip) = (0.0_f64, 0.0_f64);
        for u in self.range.sample_points(C01_GRID_POINTS) {
            sup = sup.max((f.value(u) - g.value(u)).abs());
            lip = lip.max((f.derivative(u) - g.derivative(u)).abs());
        }
        Ok(sup + lip)
    }

    /// `(α, ρ, f^α(ρ))` triples on `n_points` equispaced densities of the
    /// working range, in the order the alphas are given.
    pub fn tabulate(&self, alphas: &[f64], n_points: usize) -> Result<Vec<(f64, f64, f64)>> {
        let mut rows = Vec::with_capacity(alphas.len() * n_points);
        for &alpha in alphas {
            let f = self.member(alpha)?;
            rows.extend(self.range.sample_points(n_points).map(|u| (alpha, u, f.value(u))));
        }
        Ok(rows)
    }
}

fn validate_table(nodes: &[(f64, f64)]) -> Result<()> {
    if nodes.len() < 2 {
        return Err(Error::Parameter("tabulated flux needs at least two nodes".into()));
    }
    for &(x, y) in nodes {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::NonFiniteFlux { u: x });
        }
    }
    for w in nodes.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::Parameter(
                "tabulated flux nodes must be strictly increasing in u".into(),
            ));
        }
        if w[1].1 < w[0].1 {
            return Err(Error::Parameter("tabulated flux values must be nondecreasing".into()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum MemberLaw<'a> {
    Scaled {
        alpha: f64,
        base: &'a BaseFlux,
    },
    PiecewiseMin {
        velocity: f64,
        capacity: f64,
    },
    ProductionExp {
        capacity: f64,
        velocity: f64,
        decay: f64,
    },
    TrafficGamma {
        coefficient: f64,
        exponent: f64,
        rate: f64,
        critical: f64,
    },
}

/// A single flux function `f^α` of a family.
#[derive(Debug, Clone, Copy)]
pub struct Flux<'a> {
    alpha: f64,
    law: MemberLaw<'a>,
    range: WorkingRange,
}

impl Flux<'_> {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        match self.law {
            MemberLaw::Scaled { alpha, base } => alpha * base.value(u),
            MemberLaw::PiecewiseMin { velocity, capacity } => (velocity * u).min(capacity),
            MemberLaw::ProductionExp {
                capacity, decay, ..
            } => capacity * -(-decay * u).exp_m1(),
            MemberLaw::TrafficGamma {
                coefficient,
                exponent,
                rate,
                ..
            } => {
                if u <= 0.0 {
                    0.0
                } else {
                    coefficient * u.powf(exponent) * (-rate * u).exp()
                }
            }
        }
    }

    #[inline]
    pub fn derivative(&self, u: f64) -> f64 {
        match self.law {
            MemberLaw::Scaled { alpha, base } => alpha * base.derivative(u),
            MemberLaw::PiecewiseMin { velocity, capacity } => {
                if velocity * u <= capacity {
                    velocity
                } else {
                    0.0
                }
            }
            MemberLaw::ProductionExp {
                velocity, decay, ..
            } => velocity * (-decay * u).exp(),
            MemberLaw::TrafficGamma {
                coefficient,
                exponent,
                rate,
                ..
            } => {
                if u <= 0.0 {
                    0.0
                } else {
                    coefficient * u.powf(exponent - 1.0) * (-rate * u).exp() * (exponent - rate * u)
                }
            }
        }
    }

    pub fn shape(&self) -> FluxShape {
        match self.law {
            MemberLaw::Scaled { alpha, base } => base.scaled_shape(alpha),
            MemberLaw::PiecewiseMin { .. } | MemberLaw::ProductionExp { .. } => FluxShape::INCREASING,
            MemberLaw::TrafficGamma { critical, .. } => FluxShape::unimodal(critical),
        }
    }

    /// Upper bound of `|f'|` over the working range.
    pub fn lipschitz(&self) -> f64 {
        let range = &self.range;
        match self.law {
            MemberLaw::Scaled { alpha, base } => alpha.abs() * base.lipschitz(range),
            MemberLaw::PiecewiseMin { velocity, .. } => velocity,
            // f' is decreasing, so the sup sits at the left end
            MemberLaw::ProductionExp {
                velocity, decay, ..
            } => velocity * (-decay * range.u_min).exp(),
            MemberLaw::TrafficGamma { exponent, rate, .. } => {
                // |f'| on [0, ∞) peaks at an endpoint or where f'' = 0, i.e.
                // rate·ρ = (θ−1) ± sqrt(θ−1)
                let lo = range.u_min.max(0.0);
                let hi = range.u_max;
                if hi <= 0.0 {
                    return 0.0;
                }
                let root = exponent.sqrt();
                let inflections = [(exponent - root) / rate, (exponent + root) / rate];
                std::iter::once(lo)
                    .chain(std::iter::once(hi))
                    .chain(inflections.into_iter().filter(|r| *r >= lo && *r <= hi))
                    .map(|r| self.derivative(r).abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    pub fn range(&self) -> WorkingRange {
        self.range
    }
}
