use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid Gaussian state: {0}")]
    InvalidState(String),

    #[error("dynamical instability: {0}")]
    Instability(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("oracle did not converge: drift {drift:.3e} exceeds {tolerance:.3e} at dims {dim_a}x{dim_b}")]
    ConvergenceNotReached {
        drift: f64,
        tolerance: f64,
        dim_a: usize,
        dim_b: usize,
    },

    #[error("oracle comparison failed: {0}")]
    OracleMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True when the error comes from the numerics rather than from user input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::InvalidState(_)
                | Error::Instability(_)
                | Error::Integration { .. }
                | Error::ConvergenceNotReached { .. }
                | Error::OracleMismatch(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
