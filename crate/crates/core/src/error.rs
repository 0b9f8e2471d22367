use std::fmt;

use thiserror::Error;

/// Which rational approximant in a closure system failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Approximant {
    /// Diagonal approximant of the f′ series.
    FPrime,
    /// Diagonal approximant of the θ series.
    Theta,
    /// Diagonal approximant of (f′)³ in ξ = η³ (Blasius closure).
    FPrimeCubed,
}

impl fmt::Display for Approximant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Approximant::FPrime => f.write_str("f'"),
            Approximant::Theta => f.write_str("theta"),
            Approximant::FPrimeCubed => f.write_str("(f')^3"),
        }
    }
}

/// Why a Newton iteration gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIterations,
    Stagnation,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopReason::MaxIterations => f.write_str("iteration limit reached"),
            StopReason::Stagnation => f.write_str("residual stagnated under step damping"),
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series of order {order} cannot be differentiated {times} times")]
    SeriesTooShort { order: usize, times: usize },

    #[error("non-finite coefficient {series}({index})")]
    NonFiniteCoefficient { series: &'static str, index: usize },

    #[error("degenerate Padé approximant [{l}/{m}]: {detail}")]
    DegenerateApproximant { l: usize, m: usize, detail: String },

    #[error("rational approximant has a pole at x = {x}")]
    Pole { x: f64 },

    #[error("limit at infinity needs a diagonal approximant, got [{l}/{m}]")]
    UnsupportedDegree { l: usize, m: usize },

    #[error("limit at infinity is ill-defined: leading denominator coefficient {leading:e} is below the floor")]
    DegenerateLimit { leading: f64 },

    #[error("closure approximant of {which} failed: {source}")]
    Closure {
        which: Approximant,
        #[source]
        source: Box<Error>,
    },

    #[error("singular Jacobian at {x:?} (scaled determinant {det:e})")]
    SingularJacobian { x: Vec<f64>, det: f64 },

    #[error("residual evaluation failed while probing coordinate {coordinate} of the Jacobian: {source}")]
    JacobianProbe {
        coordinate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no convergence after {iterations} iterations ({reason}); last iterate {x:?}, residual norm {norm:e}")]
    NonConvergence {
        x: Vec<f64>,
        norm: f64,
        iterations: usize,
        reason: StopReason,
    },

    #[error("integration blew up at eta = {eta}")]
    BlowUp { eta: f64 },
}

impl Error {
    /// Unwraps closure and Jacobian-probe wrappers down to the originating error.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::Closure { source, .. } | Error::JacobianProbe { source, .. } => {
                source.root_cause()
            }
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
