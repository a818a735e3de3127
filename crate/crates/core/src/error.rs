use thiserror::Error;

use crate::sdp::SdpError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation (non-positive range, receiver behind
    /// the array axis, off-constellation symbol, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The constraint geometry is rank deficient, e.g. two users seen along the same direction.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The penalty iteration ran out of iterations. The objective trace is kept for inspection.
    #[error("no convergence after {iterations} iterations")]
    Convergence { iterations: usize, trace: Vec<f64> },

    #[error(transparent)]
    Sdp(#[from] SdpError),

    /// Scenario validation failure, keyed by the offending path in the scenario file.
    #[error("configuration error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("power budget of {budget_w} W cannot cover the message power of {message_w} W")]
    BudgetInfeasible { budget_w: f64, message_w: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config { .. } | Error::BudgetInfeasible { .. } => 2,
            Error::DegenerateGeometry(_) | Error::Infeasible(_) | Error::Convergence { .. } | Error::Sdp(_) => 3,
            Error::Io(_) => 4,
        }
    }
}
