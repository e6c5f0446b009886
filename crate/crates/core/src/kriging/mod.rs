//! Ordinary kriging with population-corrected variance schemes.

mod schemes;
mod smoothing;
mod system;

pub use crate::pointprocess::PseudoObservationSet;
pub use schemes::{
    gls_mean, krige_many, ordinary_kriging, ordinary_kriging_with, population_variance, population_variance_with,
    scaled_kriging_variance, scaled_kriging_variance_with, simulated_kriging_variance, simulated_kriging_variance_with,
    KrigingOptions, KrigingResult, RateSource, SchemeInputs, VarianceScheme, DEFAULT_MAX_SIMULATED_N, NEGATIVE_TOLERANCE,
};
pub use smoothing::{default_rate_bandwidth, smooth_inclusion_rate, smooth_inclusion_rates, SmoothedRate, MIN_RATE};
pub use system::{KrigingSystem, PointSolution, PredictionTarget};
