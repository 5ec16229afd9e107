use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("projection did not converge after {iterations} sweeps (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    #[error("body is empty: {0}")]
    EmptyBody(String),

    #[error("body is unbounded: {0}")]
    Unbounded(String),

    #[error("{0} is not supported for this body")]
    Unsupported(&'static str),

    #[error("rejection sampling accepted {accepted} of {attempts} draws; raise the sample budget or tighten the bounding radius")]
    LowAcceptance { accepted: usize, attempts: usize },

    #[error("comonotonicity required: f and g must both be nondecreasing or both nonincreasing")]
    NotComonotone,

    #[error("{0}")]
    Hypothesis(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
