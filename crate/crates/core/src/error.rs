use thiserror::Error;

/// Errors reported by the simulation kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The Fresnel chirp would be undersampled on the requested grids.
    #[error(
        "aliasing: grid step {dx:.6e} m exceeds the sampling limit {limit:.6e} m \
         (lambda*z / (2*span), span {span:.6e} m)"
    )]
    Aliasing { dx: f64, limit: f64, span: f64 },

    #[error("degenerate statistics: {0}")]
    DegenerateStatistics(String),

    #[error("unsupported source profile: {0}")]
    UnsupportedProfile(String),

    #[error("not measurable: {0}")]
    NotMeasurable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
