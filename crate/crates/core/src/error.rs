use thiserror::Error;

/// Errors raised by the verification kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource bound exceeded: {0}")]
    Resource(String),

    #[error("fields live on different charts")]
    ChartMismatch,

    #[error("metric is not positive definite at node {node} (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { node: usize, min_eig: f64 },

    #[error("ill-conditioned metric at node {node} (angles {angles:?})")]
    Conditioning { node: usize, angles: Vec<f64> },

    #[error("degenerate denominator sigma_{index} = {value:.3e} at node {node} (angles {angles:?})")]
    DegenerateDenominator {
        index: usize,
        node: usize,
        value: f64,
        angles: Vec<f64>,
    },

    #[error("perturbation amplitude exceeds cap: {0}")]
    Amplitude(String),

    #[error("iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("functional is degenerate: {0}")]
    Degeneracy(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Domain(msg.into()))
}
