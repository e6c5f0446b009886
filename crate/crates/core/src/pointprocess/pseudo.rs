//! Rejection sampling of pseudo-observation locations.
//!
//! The sample pattern's kernel intensity stands in for the population
//! intensity. Under an informative design the surface is divided by a smoothed
//! inclusion rate first, undoing `λ_s(s) = p(s) λ(s)`. Candidates are uniform
//! over the window and kept with probability `surface(s) / envelope`.

use rand::Rng as _;

use super::intensity::{kde_intensity, GridSpec, IntensitySurface, KdeBandwidth};
use super::pattern::PointPattern;
use crate::error::{Error, Result};
use crate::geometry::Location;
use crate::kriging::{default_rate_bandwidth, smooth_inclusion_rates};
use crate::rng::rng_from_seed;

/// Envelope is the surface maximum times this.
pub const ENVELOPE_FACTOR: f64 = 1.001;

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoConfig {
    pub kde_bandwidth: KdeBandwidth,
    pub grid_nx: usize,
    pub grid_ny: usize,
    /// Rate smoother bandwidth; `None` uses twice the median nearest-neighbour distance.
    pub rate_bandwidth: Option<f64>,
    /// Abort check happens once this many proposals have been made.
    pub min_proposals_before_abort: usize,
    pub min_acceptance: f64,
}

impl Default for PseudoConfig {
    fn default() -> Self {
        Self {
            kde_bandwidth: KdeBandwidth::Scott,
            grid_nx: 128,
            grid_ny: 128,
            rate_bandwidth: None,
            min_proposals_before_abort: 1_000_000,
            min_acceptance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoObservationSet {
    locations: Vec<Location>,
    pub seed: u64,
    pub proposals: usize,
    pub accepted: usize,
}

impl PseudoObservationSet {
    pub fn empty(seed: u64) -> Self {
        Self { locations: Vec::new(), seed, proposals: 0, accepted: 0 }
    }

    /// Wrap known locations, e.g. the true unsampled population units.
    pub fn from_locations(locations: Vec<Location>) -> Self {
        let n = locations.len();
        Self { locations, seed: 0, proposals: n, accepted: n }
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

/// Surface the sampler draws from: the sample KDE, divided by the smoothed
/// inclusion rate when `rates` are given.
pub fn pseudo_target_surface(sample: &PointPattern, rates: Option<&[f64]>, config: &PseudoConfig) -> Result<IntensitySurface> {
    let grid = GridSpec::new(*sample.bounds(), config.grid_nx, config.grid_ny)?;
    let kde = kde_intensity(sample.points(), &grid, config.kde_bandwidth)?;
    let Some(rates) = rates else {
        return Ok(kde);
    };
    if rates.len() != sample.len() {
        return Err(Error::InvalidInput(format!(
            "{} rates for {} sample points",
            rates.len(),
            sample.len()
        )));
    }
    let b = config.rate_bandwidth.unwrap_or_else(|| default_rate_bandwidth(sample.points()));
    let p_hat = smooth_inclusion_rates(sample.points(), rates, &grid.nodes(), b)?;
    let values = kde.values().iter().zip(&p_hat).map(|(l, p)| l / p.rate).collect();
    IntensitySurface::new(grid, values)
}

/// Draw exactly `count` locations by rejection sampling from `surface`.
pub fn rejection_sample(surface: &IntensitySurface, count: usize, config: &PseudoConfig, seed: u64) -> Result<PseudoObservationSet> {
    let bounds = surface.grid().bounds;
    let envelope = surface.max() * ENVELOPE_FACTOR;
    let mut rng = rng_from_seed(seed);
    let mut locations = Vec::with_capacity(count);
    let mut proposals = 0usize;
    while locations.len() < count {
        proposals += 1;
        let p = Location::new(
            bounds.xmin + rng.random::<f64>() * bounds.width(),
            bounds.ymin + rng.random::<f64>() * bounds.height(),
        );
        if rng.random::<f64>() * envelope < surface.evaluate(&p) {
            locations.push(p);
        }
        if proposals >= config.min_proposals_before_abort
            && (locations.len() as f64) < config.min_acceptance * proposals as f64
        {
            return Err(Error::DegenerateSurface { accepted: locations.len(), proposals });
        }
    }
    let accepted = locations.len();
    Ok(PseudoObservationSet { locations, seed, proposals, accepted })
}

/// Pseudo-observation locations for the `count = n − m` unsampled units.
/// Pass `rates` (the sample's inclusion probabilities) for informative designs.
pub fn draw_pseudo_locations(
    sample: &PointPattern,
    rates: Option<&[f64]>,
    count: usize,
    config: &PseudoConfig,
    seed: u64,
) -> Result<PseudoObservationSet> {
    if count == 0 {
        return Ok(PseudoObservationSet::empty(seed));
    }
    let surface = pseudo_target_surface(sample, rates, config)?;
    rejection_sample(&surface, count, config, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Bounds;

    fn pattern() -> PointPattern {
        let pts = (0..60)
            .map(|k| Location::new((k as f64 * 0.754_877_666).fract(), (k as f64 * 0.569_840_291).fract()))
            .collect();
        PointPattern::new(pts, Bounds::unit_square()).unwrap()
    }

    #[test]
    fn zero_count_is_empty() {
        let s = draw_pseudo_locations(&pattern(), None, 0, &PseudoConfig::default(), 1).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn exact_count_in_bounds_and_deterministic() {
        let cfg = PseudoConfig { grid_nx: 32, grid_ny: 32, ..Default::default() };
        let a = draw_pseudo_locations(&pattern(), None, 137, &cfg, 5).unwrap();
        let b = draw_pseudo_locations(&pattern(), None, 137, &cfg, 5).unwrap();
        assert_eq!(a.len(), 137);
        assert_eq!(a, b);
        assert!(a.locations().iter().all(|p| Bounds::unit_square().contains(p)));
        assert!(a.proposals >= a.accepted);
    }

    #[test]
    fn degenerate_surface_aborts() {
        let grid = GridSpec::new(Bounds::unit_square(), 201, 201).unwrap();
        // A single spike: acceptance is far below the floor.
        let mut values = vec![0.0; grid.len()];
        values[100 * 201 + 100] = 1.0;
        let surface = IntensitySurface::new(grid, values).unwrap();
        let cfg = PseudoConfig { min_proposals_before_abort: 10_000, min_acceptance: 0.5, ..Default::default() };
        assert!(matches!(
            rejection_sample(&surface, 10, &cfg, 3),
            Err(Error::DegenerateSurface { .. })
        ));
    }

    #[test]
    fn rates_must_match_points() {
        let cfg = PseudoConfig { grid_nx: 16, grid_ny: 16, ..Default::default() };
        assert!(draw_pseudo_locations(&pattern(), Some(&[0.5; 3]), 5, &cfg, 0).is_err());
    }
}
