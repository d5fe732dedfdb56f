use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("step limit of {max_steps} exceeded at t = {t}")]
    StepLimitExceeded { t: f64, max_steps: usize },

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("non-finite or diverged state after last good time t = {last_good_t}")]
    NonFiniteState { last_good_t: f64 },

    #[error("x-bar estimate did not converge: window sups {first} vs {second}")]
    NotConverged { first: f64, second: f64 },

    #[error("no limit cycle found: {0}")]
    NoCycleFound(String),

    #[error("section returns did not converge after {returns} crossings")]
    NonConvergentReturns { returns: usize },

    #[error("point ({p}, {r}) lies on the region boundary '{curve}'")]
    BoundaryPoint { p: f64, r: f64, curve: &'static str },

    #[error("equilibrium is not on a Hopf curve (trace = {trace}, det = {det})")]
    NotOnHopfCurve { trace: f64, det: f64 },

    #[error("quadrature did not converge (estimated error {estimate:e})")]
    QuadratureNotConverged { estimate: f64 },

    #[error("lambda = {lambda} sits on the threshold {threshold}")]
    AtThreshold { lambda: f64, threshold: f64 },

    #[error("bifurcation detector failed at p = {p}: {reason}")]
    DetectorFailed { p: f64, reason: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
