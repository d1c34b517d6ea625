use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse {what}: {message}")]
    Parse { what: String, message: String },

    #[error("invalid `{field}`: {message}")]
    Validation { field: &'static str, message: String },

    #[error("nucleus at distance {distance:.3e} nm is inside the {floor} nm hard floor of the dipolar field")]
    Singularity { distance: f64, floor: f64 },

    #[error("trajectory of {samples} coupling samples ({nuclei} nuclei × {frames} frames) exceeds the {limit} sample limit")]
    TooLarge {
        samples: u128,
        nuclei: usize,
        frames: usize,
        limit: u128,
    },

    #[error("correlation did not decay within the {window_us} μs window: {reason}")]
    Inconclusive {
        window_us: f64,
        reason: String,
        /// Partial γ(t) samples on the lag grid.
        partial_gamma: Vec<f64>,
    },

    #[error("step too large: |g|·dt = {product:.3} ≥ {limit}; use a smaller dt")]
    StepSize { product: f64, limit: f64 },

    #[error("memory kernel γ is negative ({value:.3e}) at t = {time} μs")]
    NegativeKernel { time: f64, value: f64 },

    #[error("numerical invariant violated: {0}")]
    Invariant(String),

    #[error("{0}")]
    Incompatible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::Validation {
            field,
            message: message.into(),
        }
    }
}
