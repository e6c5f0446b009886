//! Gaussian kernel smoother for inclusion rates.

use log::warn;

use crate::error::{Error, Result};
use crate::geometry::Location;
use crate::pointprocess::nearest_neighbor_distances;

/// Lower clamp for smoothed rates.
pub const MIN_RATE: f64 = 1e-6;
/// Targets with no sample point within this many bandwidths fall back to the global mean.
pub const SUPPORT_RADIUS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedRate {
    pub rate: f64,
    /// True when no sample point was close enough and the global mean was used.
    pub fallback: bool,
}

/// Twice the median nearest-neighbour distance among the sample locations.
pub fn default_rate_bandwidth(locations: &[Location]) -> f64 {
    if locations.len() < 2 {
        return 1.0;
    }
    let mut nn = nearest_neighbor_distances(locations);
    let mid = nn.len() / 2;
    let (_, m, _) = nn.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    let b = 2.0 * *m;
    if b > 0.0 {
        b
    } else {
        1.0
    }
}

fn validate(locations: &[Location], rates: &[f64], bandwidth: f64) -> Result<()> {
    if locations.is_empty() || locations.len() != rates.len() {
        return Err(Error::InvalidInput(format!(
            "{} rates for {} locations",
            rates.len(),
            locations.len()
        )));
    }
    if let Some(i) = rates.iter().position(|&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::InvalidInput(format!("rate {i} = {} outside (0, 1]", rates[i])));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidInput(format!("bandwidth must be positive, got {bandwidth}")));
    }
    Ok(())
}

/// Nadaraya–Watson average of `rates` at `target`, clamped to `[MIN_RATE, 1]`.
pub fn smooth_inclusion_rate(locations: &[Location], rates: &[f64], target: &Location, bandwidth: f64) -> Result<SmoothedRate> {
    validate(locations, rates, bandwidth)?;
    Ok(smooth_unchecked(locations, rates, target, bandwidth))
}

/// Smoothed rate at many targets.
pub fn smooth_inclusion_rates(locations: &[Location], rates: &[f64], targets: &[Location], bandwidth: f64) -> Result<Vec<SmoothedRate>> {
    validate(locations, rates, bandwidth)?;
    Ok(targets.iter().map(|t| smooth_unchecked(locations, rates, t, bandwidth)).collect())
}

fn smooth_unchecked(locations: &[Location], rates: &[f64], target: &Location, bandwidth: f64) -> SmoothedRate {
    // Work relative to the nearest point so the kernel does not underflow as b → 0.
    let d: Vec<f64> = locations.iter().map(|p| p.distance(target)).collect();
    let dmin = d.iter().cloned().fold(f64::INFINITY, f64::min);
    if dmin > SUPPORT_RADIUS * bandwidth {
        warn!("no sample point within {SUPPORT_RADIUS} bandwidths of ({}, {}); using the mean rate", target.x, target.y);
        let mean = rates.iter().sum::<f64>() / rates.len() as f64;
        return SmoothedRate { rate: mean.clamp(MIN_RATE, 1.0), fallback: true };
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (di, ri) in d.iter().zip(rates) {
        let u0 = dmin / bandwidth;
        let u = di / bandwidth;
        let k = (-0.5 * (u * u - u0 * u0)).exp();
        num += k * ri;
        den += k;
    }
    SmoothedRate { rate: (num / den).clamp(MIN_RATE, 1.0), fallback: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_rates() {
        let locs = [Location::new(0.0, 0.0), Location::new(1.0, 0.3), Location::new(0.2, 0.9)];
        let r = smooth_inclusion_rate(&locs, &[0.3; 3], &Location::new(0.5, 0.5), 0.4).unwrap();
        assert!((r.rate - 0.3).abs() < 1e-15);
        assert!(!r.fallback);
    }

    #[test]
    fn tiny_bandwidth_picks_the_coincident_point() {
        let locs = [Location::new(0.0, 0.0), Location::new(1.0, 0.0)];
        let r = smooth_inclusion_rate(&locs, &[0.1, 0.7], &Location::new(1.0, 0.0), 1e-9).unwrap();
        assert_eq!(r.rate, 0.7);
    }

    #[test]
    fn equidistant_target_averages() {
        let locs = [Location::new(0.0, 0.0), Location::new(1.0, 0.0)];
        let r = smooth_inclusion_rate(&locs, &[0.1, 0.3], &Location::new(0.5, 0.2), 0.3).unwrap();
        assert!((r.rate - 0.2).abs() < 1e-15);
    }

    #[test]
    fn far_target_falls_back_to_mean() {
        let locs = [Location::new(0.0, 0.0), Location::new(1.0, 0.0)];
        let r = smooth_inclusion_rate(&locs, &[0.1, 0.3], &Location::new(50.0, 50.0), 0.1).unwrap();
        assert!(r.fallback);
        assert!((r.rate - 0.2).abs() < 1e-15);
    }

    #[test]
    fn validates_inputs() {
        let locs = [Location::new(0.0, 0.0)];
        assert!(smooth_inclusion_rate(&locs, &[0.0], &locs[0], 0.1).is_err());
        assert!(smooth_inclusion_rate(&locs, &[0.5], &locs[0], 0.0).is_err());
        assert!(smooth_inclusion_rate(&locs, &[0.5, 0.5], &locs[0], 0.1).is_err());
    }
}
