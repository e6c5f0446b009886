//! Variogram parameter estimation by (weighted) composite likelihood.

mod contrasts;
mod empirical;
mod fit;
mod objective;
pub mod optimizer;

pub use contrasts::{build_contrasts, Contrast, ContrastSet, WeightScheme};
pub use empirical::{
    default_mark_bandwidth, empirical_semivariogram, kernel_semivariogram, mark_variogram_corrected,
    mark_variogram_with_intensities, LagBin,
};
pub use fit::{default_initial_model, fit_contrasts, fit_variogram, FitConfig, FitResult, PARAM_LOWER, PARAM_UPPER};
pub use objective::{neg_log_wcl, neg_log_wcl_gradient, neg_log_wcl_with, Reduction};
