use thiserror::Error;

use crate::grid::Box2;
use crate::jet::JetError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("arity mismatch for `{name}` at position {pos}: {msg}")]
    Arity {
        name: String,
        pos: usize,
        msg: String,
    },

    #[error("domain error at ({x}, {y}): {source}")]
    Domain {
        x: f64,
        y: f64,
        #[source]
        source: JetError,
    },

    #[error("point ({x}, {y}) outside validity domain {domain}")]
    OutsideDomain { x: f64, y: f64, domain: Box2 },

    #[error("metric not positive definite at ({x}, {y}): leading minor {minor} = {value}")]
    NotPositiveDefinite {
        x: f64,
        y: f64,
        minor: usize,
        value: f64,
    },

    #[error("singular metric at ({x}, {y})")]
    SingularMetric { x: f64, y: f64 },

    #[error("{what} is not positive at ({x}, {y}): {value}")]
    NonPositive {
        what: &'static str,
        x: f64,
        y: f64,
        value: f64,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("singular ODE coefficient {coefficient:e} at z = {z}")]
    Singularity { z: f64, coefficient: f64 },

    #[error("step size underflow at z = {z} (step {step:e})")]
    StepUnderflow { z: f64, step: f64 },

    #[error("configuration error in `{field}`{}: {msg}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        field: String,
        line: Option<usize>,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(x: f64, y: f64) -> impl FnOnce(JetError) -> Error {
        move |source| Error::Domain { x, y, source }
    }

    pub(crate) fn config(field: impl Into<String>, msg: impl Into<String>) -> Error {
        Error::Config {
            field: field.into(),
            line: None,
            msg: msg.into(),
        }
    }

    /// True for errors caused by malformed user input rather than by the
    /// mathematics of the requested family.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::UnknownIdentifier { .. }
                | Error::Arity { .. }
                | Error::Config { .. }
                | Error::Parameter(_)
        )
    }
}
