//! Point-pattern tools: intensity surfaces, LGCP simulation, nearest-neighbour
//! diagnostics and pseudo-observation sampling.

mod gfunction;
mod intensity;
mod lgcp;
mod pattern;
mod pseudo;

pub use gfunction::{csr_g, g_function, nearest_neighbor_distances};
pub use intensity::{kde_intensity, scott_bandwidth, GridSpec, IntensitySurface, KdeBandwidth};
pub use lgcp::{calibrate_base_rate, lgcp_intensity, simulate_inhomogeneous_poisson, simulate_lgcp};
pub use pattern::PointPattern;
pub use pseudo::{
    draw_pseudo_locations, pseudo_target_surface, rejection_sample, PseudoConfig, PseudoObservationSet, ENVELOPE_FACTOR,
};
