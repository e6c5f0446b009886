use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("negative distance {0}")]
    NegativeDistance(f64),

    #[error("covariance matrix of size {size} is not positive definite after jitter up to {max_jitter:e}")]
    IllConditioned { size: usize, max_jitter: f64 },

    #[error("nonpositive semivariogram {gamma:e} at pair ({i}, {j}) with distance {distance}")]
    NonPositiveGamma {
        i: usize,
        j: usize,
        distance: f64,
        gamma: f64,
    },

    #[error("missing field: {0}")]
    MissingField(&'static str),

    #[error("rejection sampler degenerate: {accepted} accepted out of {proposals} proposals")]
    DegenerateSurface { accepted: usize, proposals: usize },

    #[error("intensity upper bound overflow (max log-intensity {0})")]
    IntensityOverflow(f64),

    #[error("empty sample drawn from population of {0} units")]
    EmptySample(usize),

    #[error("combined size {0} exceeds the simulated-scheme limit; set an explicit override")]
    TooLarge(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
