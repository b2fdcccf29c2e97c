use core::fmt;

/// Failures raised by the core numerics.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// A parameter lies outside the admissible range of the routine.
    Domain(&'static str),
    /// Model parameters do not describe noneffective damping.
    EffectiveDamping { sigma: f64, theta: f64 },
    /// Requested point sits on or beyond the double root of the characteristic equation.
    Regime { rho: f64 },
    /// No estimate is available for the requested combination.
    NotCovered(&'static str),
    /// Adaptive routine exhausted its work budget before reaching tolerance.
    Budget { achieved: f64, requested: f64 },
    /// A series had fewer usable samples than required.
    InsufficientSamples { have: usize, need: usize },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::Domain(msg) => write!(f, "domain error: {msg}"),
            CoreError::EffectiveDamping { sigma, theta } => write!(
                f,
                "effective damping (sigma = {sigma}, theta = {theta}): need sigma < 2 theta <= 2 sigma"
            ),
            CoreError::Regime { rho } => {
                write!(f, "frequency {rho} is outside the oscillatory regime")
            }
            CoreError::NotCovered(msg) => write!(f, "not covered: {msg}"),
            CoreError::Budget { achieved, requested } => write!(
                f,
                "tolerance {requested:e} not reached within budget (estimate {achieved:e})"
            ),
            CoreError::InsufficientSamples { have, need } => {
                write!(f, "only {have} samples in window, need at least {need}")
            }
        }
    }
}

impl core::error::Error for CoreError {}

pub type Result<T> = core::result::Result<T, CoreError>;
