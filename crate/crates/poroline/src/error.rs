//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh resolution: {0}")]
    InvalidMeshSize(String),

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("degenerate line segment: endpoints coincide")]
    DegenerateSegment,

    #[error("on-segment evaluation: point lies on a line-source segment; use quadrature points off the segment")]
    OnSegment,

    #[error("invalid material parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("linear solve failed: {0}")]
    SolveFailed(String),

    #[error("linear solve residual {achieved:.3e} exceeds tolerance {required:.3e}")]
    ResidualTooLarge { achieved: f64, required: f64 },

    #[error("fixed-stress iteration did not converge in {max_iters} iterations (last increment {increment:.3e}, threshold {threshold:.3e})")]
    MaxItersExceeded {
        max_iters: usize,
        increment: f64,
        threshold: f64,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
