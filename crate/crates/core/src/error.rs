use thiserror::Error;

/// Errors produced by the approximation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("root t_{k} did not converge; last bracket [{lo}, {hi}]")]
    RootNotConverged { k: usize, lo: f64, hi: f64 },

    #[error("sampling density vanishes at {point:?}; the sample cannot be weighted")]
    ZeroDensity { point: Vec<f64> },

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("solver breakdown (zero curvature) at iteration {iteration}")]
    Breakdown { iteration: usize },

    #[error("quadrature did not reach tolerance {requested:e} (achieved {achieved:e})")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical method, as opposed to bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RootNotConverged { .. }
                | Error::NonFinite(_)
                | Error::Breakdown { .. }
                | Error::Quadrature { .. }
                | Error::ZeroDensity { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
