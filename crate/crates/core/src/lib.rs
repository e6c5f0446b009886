//! Spatial prediction under informative sampling.
//!
//! * [`estimation`]: exponential variogram fitting by weighted composite
//!   likelihood, with unit, survey (inverse inclusion probability) and
//!   sampling-intensity weights, plus moment and kernel variogram estimators.
//! * [`kriging`]: ordinary kriging with sample-only, population,
//!   distance-scaled and pseudo-observation variance schemes.
//! * [`pointprocess`]: kernel intensity surfaces, log-Gaussian Cox process
//!   simulation, the G-function, and pseudo-observation sampling.
//! * [`designs`]: Bernoulli sampling designs over a finite population.

pub mod designs;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod gp;
pub mod kriging;
pub mod linalg;
pub mod pointprocess;
pub mod rng;
pub mod sample;
pub mod synthetic;
pub mod variogram;

pub use error::{Error, Result};
pub use geometry::{distance_matrix, Bounds, DistanceMatrix, Location, LocationSet};
pub use gp::{simulate_gp, simulate_gp_conditional, GpRealization};
pub use sample::SpatialSample;
pub use variogram::VariogramModel;
