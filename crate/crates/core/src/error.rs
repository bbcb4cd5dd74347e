use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("orbit left the working region at step {step} (|x - center| = {distance})")]
    OrbitEscape { step: usize, distance: f64 },

    #[error("tangent vector vanished at step {step}; the map is not a local diffeomorphism there")]
    ZeroTangent { step: usize },

    #[error("matrix is numerically singular: {0}")]
    Singular(&'static str),

    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("matrix builder failed at cover center {center}: {source}")]
    Builder {
        center: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
