use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "circulant embedding failure: clamped eigenvalue mass {mass_fraction:.4} of trace \
         exceeds {limit:.4} (covariance not realizable on this torus)"
    )]
    EmbeddingFailure { mass_fraction: f64, limit: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { pivot: f64, index: usize },

    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
