use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("steady state is not unique: {0}")]
    DegenerateSteadyState(String),

    #[error("state is not stationary under the generator (residual {residual:.3e})")]
    NotStationary { residual: f64 },

    #[error("unstable moment system: eigenvalue with real part {0:.3e}")]
    Unstable(f64),

    #[error("integrator step size underflow at t = {t:.6e} s (h = {h:.3e} s)")]
    StepUnderflow { t: f64, h: f64 },

    #[error("frequency grid does not cover the emission line: {0}")]
    GridCoverage(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("input too short: {0}")]
    TooShort(String),

    #[error("fit did not converge after {iterations} iterations (cost {cost:.3e}, gradient {gradient:.3e})")]
    NoConvergence {
        iterations: usize,
        cost: f64,
        gradient: f64,
    },

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular(_)
                | Error::DegenerateSteadyState(_)
                | Error::NotStationary { .. }
                | Error::Unstable(_)
                | Error::StepUnderflow { .. }
                | Error::NoConvergence { .. }
                | Error::IllConditioned(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
