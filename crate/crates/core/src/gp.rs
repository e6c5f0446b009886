//! Gaussian-process realizations via Cholesky factorization.

use nalgebra::DVector;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{Location, LocationSet};
use crate::linalg::{covariance_matrix, CovarianceFactor};
use crate::rng::rng_from_seed;
use crate::variogram::VariogramModel;

/// One draw of `μ + W(s) + ε(s)` at a fixed set of locations.
#[derive(Debug, Clone)]
pub struct GpRealization {
    pub locations: LocationSet,
    pub values: Vec<f64>,
    pub model: VariogramModel,
    pub mean: f64,
}

fn standard_normals(n: usize, seed: u64) -> DVector<f64> {
    let mut rng = rng_from_seed(seed);
    DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// Draw a realization with mean `mean` and covariance `C(d_ij)`.
///
/// The nugget enters the diagonal, so the draw includes measurement error.
pub fn simulate_gp(locs: &LocationSet, model: &VariogramModel, mean: f64, seed: u64) -> Result<GpRealization> {
    let factor = CovarianceFactor::from_locations(locs.points(), model, 1.0)?;
    let z = standard_normals(locs.len(), seed);
    let w = factor.lower() * z;
    Ok(GpRealization {
        locations: locs.clone(),
        values: w.iter().map(|v| v + mean).collect(),
        model: *model,
        mean,
    })
}

/// Draw the field at `targets` conditional on the values in `known`.
///
/// `W_t | W_k ~ N(μ + C_tk C_kk⁻¹ (w_k − μ), C_tt − C_tk C_kk⁻¹ C_kt)`
pub fn simulate_gp_conditional(known: &GpRealization, targets: &LocationSet, seed: u64) -> Result<GpRealization> {
    let model = &known.model;
    let kpts = known.locations.points();
    let tpts = targets.points();
    let kfac = CovarianceFactor::from_locations(kpts, model, 1.0)?;

    let mut cross = nalgebra::DMatrix::zeros(kpts.len(), tpts.len());
    for (j, t) in tpts.iter().enumerate() {
        for (i, k) in kpts.iter().enumerate() {
            cross[(i, j)] = cov_between(model, k, t);
        }
    }
    // A = L⁻¹ C_kt, so C_tk C_kk⁻¹ C_kt = AᵀA.
    let l = kfac.lower();
    let a = l
        .solve_lower_triangular(&cross)
        .ok_or(Error::IllConditioned { size: kpts.len(), max_jitter: 0.0 })?;
    let resid = DVector::from_iterator(kpts.len(), known.values.iter().map(|v| v - known.mean));
    let alpha = l
        .solve_lower_triangular(&resid)
        .ok_or(Error::IllConditioned { size: kpts.len(), max_jitter: 0.0 })?;
    let cond_mean = a.transpose() * alpha;
    let mut cond_cov = covariance_matrix(tpts, model, 1.0) - a.transpose() * &a;
    cond_cov = (&cond_cov + cond_cov.transpose()) * 0.5;

    let tfac = CovarianceFactor::new(cond_cov, model.sill())?;
    let z = standard_normals(tpts.len(), seed);
    let draw = tfac.lower() * z;
    Ok(GpRealization {
        locations: targets.clone(),
        values: (0..tpts.len()).map(|i| known.mean + cond_mean[i] + draw[i]).collect(),
        model: *model,
        mean: known.mean,
    })
}

// Coincident known/target points share the field value but not the nugget.
fn cov_between(model: &VariogramModel, a: &Location, b: &Location) -> f64 {
    let d = a.distance(b);
    if d == 0.0 {
        model.partial_sill()
    } else {
        model.covariance_unchecked(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn latent() -> VariogramModel {
        VariogramModel::new(0.0, 0.4, 0.1).unwrap()
    }

    #[test]
    fn fixed_seed_is_bitwise_reproducible() {
        let locs = LocationSet::from_xy(&[(0.0, 0.0), (0.1, 0.2), (0.5, 0.5), (0.9, 0.1)]).unwrap();
        let m = VariogramModel::new(0.2, 0.4, 0.1).unwrap();
        let a = simulate_gp(&locs, &m, 1.0, 42).unwrap();
        let b = simulate_gp(&locs, &m, 1.0, 42).unwrap();
        assert_eq!(a.values, b.values);
        let c = simulate_gp(&locs, &m, 1.0, 43).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn single_point_moments() {
        let locs = LocationSet::from_xy(&[(0.3, 0.3)]).unwrap();
        let m = latent();
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|s| simulate_gp(&locs, &m, 1.0, s).unwrap().values[0])
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 3.0 * (0.4f64 / n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn distant_points_uncorrelated() {
        let locs = LocationSet::from_xy(&[(0.0, 0.0), (100.0, 0.0)]).unwrap();
        let m = latent();
        let n = 10_000;
        let draws: Vec<Vec<f64>> = (0..n).map(|s| simulate_gp(&locs, &m, 0.0, s).unwrap().values).collect();
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for d in &draws {
            sxy += d[0] * d[1];
            sxx += d[0] * d[0];
            syy += d[1] * d[1];
        }
        let r = sxy / (sxx * syy).sqrt();
        assert!(r.abs() < 0.05, "correlation {r}");
    }

    #[test]
    fn duplicate_points_without_nugget_are_rescued_by_jitter() {
        let locs = LocationSet::from_xy(&[(0.5, 0.5), (0.5, 0.5)]).unwrap();
        let r = simulate_gp(&locs, &latent(), 0.0, 1).unwrap();
        assert!((r.values[0] - r.values[1]).abs() < 1e-3);
    }

    #[test]
    fn conditional_draw_interpolates_known_values() {
        let known_locs = LocationSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]).unwrap();
        let known = simulate_gp(&known_locs, &latent(), 0.5, 3).unwrap();
        // Targets very near the known points reproduce their values closely.
        let targets = LocationSet::from_xy(&[(1e-7, 0.0), (1.0, 1e-7)]).unwrap();
        let cond = simulate_gp_conditional(&known, &targets, 9).unwrap();
        assert!((cond.values[0] - known.values[0]).abs() < 0.01);
        assert!((cond.values[1] - known.values[1]).abs() < 0.01);
    }
}
