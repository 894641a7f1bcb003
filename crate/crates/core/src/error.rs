use thiserror::Error;

use crate::coords::Chart;

/// Errors raised by the numerical kernels.
///
/// Singular configurations are always reported through [`Error::Singular`]
/// rather than returned as non-finite numbers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("chart mismatch: expected {expected}, got {found}")]
    ChartMismatch { expected: Chart, found: Chart },

    #[error("no transform from {from} to {to}")]
    UnsupportedTransform { from: Chart, to: Chart },

    #[error("chart singularity: {0}")]
    SingularChart(String),

    #[error("singular configuration: {denominator} vanishes")]
    Singular { denominator: String },

    #[error("jet pole: {0}")]
    JetPole(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unknown identifier `{0}`")]
    UnknownId(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("no phase/scale pair fits (residual {residual:e})")]
    ConventionMismatch { residual: f64 },

    #[error("step rejected: {0}")]
    StepRejected(String),

    #[error("implicit solve did not converge after {iterations} iterations (last update {last_update:e})")]
    NoConvergence { iterations: usize, last_update: f64 },

    #[error("group closure did not terminate after {products} products")]
    ClosureFailed { products: usize },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn singular(denominator: impl Into<String>) -> Error {
    Error::Singular {
        denominator: denominator.into(),
    }
}

pub(crate) fn invalid_param(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
