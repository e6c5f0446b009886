//! Factorized ordinary-kriging system shared by every variance scheme.
//!
//! For locations with covariance `C`, target cross-covariance `c*` and
//! `x = C⁻¹c*`:
//!
//! ```text
//! μ̂   = 1ᵀC⁻¹Z / 1ᵀC⁻¹1
//! Ẑ    = μ̂ + xᵀ(Z − μ̂1)
//! σ²   = var(Z(s*)) − c*ᵀx + (1 − 1ᵀx)² / 1ᵀC⁻¹1
//! ```

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::Location;
use crate::linalg::{covariance_matrix, CovarianceFactor};
use crate::variogram::VariogramModel;

/// What `var(Z(s*))` refers to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PredictionTarget {
    /// A new noisy observation: `var(Z(s*)) = τ² + σ²`.
    #[default]
    Observation,
    /// The latent smooth surface: `var(Z(s*)) = σ²`.
    Latent,
}

#[derive(Debug, Clone)]
pub struct KrigingSystem {
    locations: Vec<Location>,
    model: VariogramModel,
    distance_scale: f64,
    target: PredictionTarget,
    factor: CovarianceFactor,
    c_inv_ones: DVector<f64>,
    ones_c_inv_ones: f64,
}

/// Weights and variance at one target, before any response values are used.
#[derive(Debug, Clone)]
pub struct PointSolution {
    /// `C⁻¹c*`
    pub weights: DVector<f64>,
    /// Unclamped variance.
    pub variance: f64,
}

impl KrigingSystem {
    pub fn new(
        locations: &[Location],
        model: &VariogramModel,
        distance_scale: f64,
        target: PredictionTarget,
    ) -> Result<Self> {
        if locations.is_empty() {
            return Err(Error::InvalidInput("kriging needs at least one location".into()));
        }
        if !(distance_scale > 0.0 && distance_scale.is_finite()) {
            return Err(Error::InvalidInput(format!("distance scale must be positive, got {distance_scale}")));
        }
        let c = covariance_matrix(locations, model, distance_scale);
        let factor = CovarianceFactor::new(c, model.sill())?;
        let ones = DVector::from_element(locations.len(), 1.0);
        let c_inv_ones = factor.solve(&ones);
        let ones_c_inv_ones = c_inv_ones.sum();
        if !(ones_c_inv_ones > 0.0 && ones_c_inv_ones.is_finite()) {
            return Err(Error::IllConditioned { size: locations.len(), max_jitter: factor.jitter() });
        }
        Ok(Self {
            locations: locations.to_vec(),
            model: *model,
            distance_scale,
            target,
            factor,
            c_inv_ones,
            ones_c_inv_ones,
        })
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn model(&self) -> &VariogramModel {
        &self.model
    }

    pub fn jitter(&self) -> f64 {
        self.factor.jitter()
    }

    fn prior_variance(&self) -> f64 {
        match self.target {
            PredictionTarget::Observation => self.model.sill(),
            PredictionTarget::Latent => self.model.partial_sill(),
        }
    }

    fn cross(&self, pred: &Location) -> DVector<f64> {
        let at_zero = self.prior_variance();
        DVector::from_iterator(
            self.locations.len(),
            self.locations.iter().map(|p| {
                let d = self.distance_scale * p.distance(pred);
                if d == 0.0 {
                    at_zero
                } else {
                    self.model.covariance_unchecked(d)
                }
            }),
        )
    }

    pub fn solve_point(&self, pred: &Location) -> PointSolution {
        let c_star = self.cross(pred);
        let x = self.factor.solve(&c_star);
        let penalty = 1.0 - x.sum();
        let variance = self.prior_variance() - c_star.dot(&x) + penalty * penalty / self.ones_c_inv_ones;
        PointSolution { weights: x, variance }
    }

    /// Generalized least squares mean `1ᵀC⁻¹Z / 1ᵀC⁻¹1`.
    pub fn gls_mean(&self, values: &[f64]) -> Result<f64> {
        self.check_values(values)?;
        let z = DVector::from_column_slice(values);
        Ok(self.c_inv_ones.dot(&z) / self.ones_c_inv_ones)
    }

    /// Kriging mean at `pred` from a precomputed solution.
    pub fn predict_mean(&self, sol: &PointSolution, values: &[f64]) -> Result<f64> {
        let mu = self.gls_mean(values)?;
        let resid = DVector::from_iterator(values.len(), values.iter().map(|v| v - mu));
        Ok(mu + sol.weights.dot(&resid))
    }

    fn check_values(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.locations.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} kriging locations",
                values.len(),
                self.locations.len()
            )));
        }
        Ok(())
    }
}
