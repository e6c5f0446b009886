//! Log-Gaussian Cox process simulation by thinning.

use rand::Rng as _;
use rand_distr::{Distribution, Poisson};

use super::intensity::{GridSpec, IntensitySurface};
use super::pattern::PointPattern;
use crate::error::{Error, Result};
use crate::geometry::Location;
use crate::gp::GpRealization;
use crate::rng::rng_from_seed;

/// Largest exponent accepted before the envelope is considered overflowed.
const MAX_LOG_INTENSITY: f64 = 700.0;
/// Cap on the expected number of proposals in one draw.
const MAX_EXPECTED_PROPOSALS: f64 = 1e8;

fn check_field(field: &GpRealization, grid: &GridSpec) -> Result<()> {
    if field.values.len() != grid.len() {
        return Err(Error::InvalidInput(format!(
            "field has {} values but the grid has {} nodes",
            field.values.len(),
            grid.len()
        )));
    }
    Ok(())
}

/// `base_rate · exp(β · field)` at the grid nodes. `field` holds one value per
/// node in [`GridSpec::nodes`] order.
pub fn lgcp_intensity(field: &GpRealization, grid: &GridSpec, beta: f64, base_rate: f64) -> Result<IntensitySurface> {
    check_field(field, grid)?;
    if !(base_rate > 0.0 && base_rate.is_finite()) {
        return Err(Error::InvalidInput(format!("base rate must be positive, got {base_rate}")));
    }
    let max_log = field.values.iter().map(|v| beta * v).fold(f64::NEG_INFINITY, f64::max) + base_rate.ln();
    if max_log > MAX_LOG_INTENSITY {
        return Err(Error::IntensityOverflow(max_log));
    }
    IntensitySurface::new(*grid, field.values.iter().map(|v| base_rate * (beta * v).exp()).collect())
}

/// Base rate whose expected event count, given the field, equals `target`.
pub fn calibrate_base_rate(field: &GpRealization, grid: &GridSpec, beta: f64, target: f64) -> Result<f64> {
    let unit = lgcp_intensity(field, grid, beta, 1.0)?;
    Ok(target / unit.integral())
}

/// Inhomogeneous Poisson draw from an intensity surface: homogeneous proposals
/// at the surface maximum, each kept with probability `λ(s) / max λ`.
pub fn simulate_inhomogeneous_poisson(surface: &IntensitySurface, seed: u64) -> Result<PointPattern> {
    let bounds = surface.grid().bounds;
    let upper = surface.max();
    let expected = upper * bounds.area();
    if !expected.is_finite() || expected > MAX_EXPECTED_PROPOSALS {
        return Err(Error::IntensityOverflow(upper.ln()));
    }
    let mut rng = rng_from_seed(seed);
    let count = if expected > 0.0 {
        Poisson::new(expected)
            .map_err(|e| Error::InvalidInput(format!("poisson mean {expected}: {e}")))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let mut points = Vec::new();
    for _ in 0..count {
        let p = Location::new(
            bounds.xmin + rng.random::<f64>() * bounds.width(),
            bounds.ymin + rng.random::<f64>() * bounds.height(),
        );
        if rng.random::<f64>() * upper < surface.evaluate(&p) {
            points.push(p);
        }
    }
    PointPattern::new(points, bounds)
}

/// LGCP draw with intensity `base_rate · exp(β · field(s))`, the field given on
/// the nodes of `grid` and interpolated bilinearly.
pub fn simulate_lgcp(
    field: &GpRealization,
    grid: &GridSpec,
    beta: f64,
    base_rate: f64,
    seed: u64,
) -> Result<(PointPattern, IntensitySurface)> {
    let surface = lgcp_intensity(field, grid, beta, base_rate)?;
    let pattern = simulate_inhomogeneous_poisson(&surface, seed)?;
    Ok((pattern, surface))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Bounds, LocationSet};
    use crate::variogram::VariogramModel;

    fn flat_field(grid: &GridSpec, value: f64) -> GpRealization {
        GpRealization {
            locations: LocationSet::new(grid.nodes()).unwrap(),
            values: vec![value; grid.len()],
            model: VariogramModel::new(0.0, 0.4, 0.1).unwrap(),
            mean: 0.0,
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let grid = GridSpec::new(Bounds::unit_square(), 8, 8).unwrap();
        let f = flat_field(&grid, 0.3);
        let (a, _) = simulate_lgcp(&f, &grid, 1.0, 50.0, 9).unwrap();
        let (b, _) = simulate_lgcp(&f, &grid, 1.0, 50.0, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.points().iter().all(|p| grid.bounds.contains(p)));
    }

    #[test]
    fn overflow_detected() {
        let grid = GridSpec::new(Bounds::unit_square(), 4, 4).unwrap();
        let f = flat_field(&grid, 1000.0);
        assert!(matches!(simulate_lgcp(&f, &grid, 1.0, 1.0, 0), Err(Error::IntensityOverflow(_))));
    }

    #[test]
    fn calibration_hits_target_in_expectation() {
        let grid = GridSpec::new(Bounds::unit_square(), 8, 8).unwrap();
        let f = flat_field(&grid, 0.5);
        let base = calibrate_base_rate(&f, &grid, 2.0, 1000.0).unwrap();
        assert!((base * 1f64.exp() - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn field_size_mismatch() {
        let grid = GridSpec::new(Bounds::unit_square(), 8, 8).unwrap();
        let other = GridSpec::new(Bounds::unit_square(), 4, 4).unwrap();
        assert!(simulate_lgcp(&flat_field(&other, 0.0), &grid, 1.0, 1.0, 0).is_err());
    }
}
