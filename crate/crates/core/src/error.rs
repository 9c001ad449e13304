use thiserror::Error;

use crate::diagram::DiagramError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    Hermiticity { deviation: f64 },

    #[error("cannot compose: {0}")]
    Composition(String),

    #[error("processes belong to different theories: {left} vs {right}")]
    TheoryMismatch { left: String, right: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("states are not purifications of the same marginal (residual {residual:.3e})")]
    NotCopurifying { residual: f64 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("candidate set of {size} exceeds the limit of {limit}")]
    Budget { size: usize, limit: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Diagram(#[from] DiagramError),

    #[error("malformed theory specification: {0}")]
    Spec(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
