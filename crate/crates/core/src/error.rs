use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("field evaluated inside wire {wire} (distance {distance:e} m, exclusion radius {radius:e} m)")]
    Singularity {
        wire: usize,
        distance: f64,
        radius: f64,
    },

    #[error("step size underflow at t = {t:e} s (h = {h:e} s); tolerances cannot be met")]
    StepFailure { t: f64, h: f64 },

    #[error("integration exceeded {0} steps")]
    TooManySteps(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("distance to ({x:e}, {z:e}) is monotone over the trajectory; no closest approach")]
    NoApproach { x: f64, z: f64 },

    #[error("bracket [{lo}, {hi}] does not straddle a root (f = {f_lo:e}, {f_hi:e})")]
    NoBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error(
        "root solve did not converge after {iterations} iterations (last residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("trajectory topology: {0}")]
    Topology(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
