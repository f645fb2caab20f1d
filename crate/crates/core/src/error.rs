use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("flux parameter {alpha} outside the family domain {domain}")]
    ParameterDomain { alpha: f64, domain: String },

    #[error("non-finite flux sample at u = {u}")]
    NonFiniteFlux { u: f64 },

    #[error("time step {dt} exceeds the CFL bound {bound}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("window [{a}, {b}] outside the grid domain [{x_min}, {x_max}]")]
    WindowOutsideDomain {
        a: f64,
        b: f64,
        x_min: f64,
        x_max: f64,
    },

    #[error("non-finite state at t = {time} (step {step}, alpha = {alpha})")]
    NonFiniteState { time: f64, step: usize, alpha: f64 },

    #[error("jump cap {cap} exceeded at t = {time}")]
    JumpCapExceeded { cap: usize, time: f64 },

    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("missing snapshot or probe: {0}")]
    MissingSnapshot(String),

    #[error("empty group: {0}")]
    EmptyGroup(String),

    #[error("invalid scenario configuration:\n{}", .0.iter().map(|m| format!("  - {m}")).collect::<Vec<_>>().join("\n"))]
    InvalidConfig(Vec<String>),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
