use crate::error::{Error, Result};
use crate::geometry::LocationSet;

/// Observed locations, responses and optional design inclusion probabilities.
#[derive(Debug, Clone)]
pub struct SpatialSample {
    locations: LocationSet,
    values: Vec<f64>,
    inclusion_probs: Option<Vec<f64>>,
}

impl SpatialSample {
    pub fn new(locations: LocationSet, values: Vec<f64>, inclusion_probs: Option<Vec<f64>>) -> Result<Self> {
        let n = locations.len();
        if values.len() != n {
            return Err(Error::InvalidInput(format!(
                "{} values for {n} locations",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("value {i} is not finite")));
        }
        if let Some(p) = &inclusion_probs {
            if p.len() != n {
                return Err(Error::InvalidInput(format!(
                    "{} inclusion probabilities for {n} locations",
                    p.len()
                )));
            }
            if let Some(i) = p.iter().position(|&v| !(v > 0.0 && v <= 1.0)) {
                return Err(Error::InvalidInput(format!(
                    "inclusion probability {i} = {} outside (0, 1]",
                    p[i]
                )));
            }
        }
        Ok(Self { locations, values, inclusion_probs })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn locations(&self) -> &LocationSet {
        &self.locations
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn inclusion_probs(&self) -> Option<&[f64]> {
        self.inclusion_probs.as_deref()
    }

    /// Same sample with every inclusion probability replaced.
    pub fn with_inclusion_probs(&self, probs: Vec<f64>) -> Result<Self> {
        Self::new(self.locations.clone(), self.values.clone(), Some(probs))
    }

    pub fn sample_variance(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.values.iter().sum::<f64>() / n as f64;
        self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_lengths_and_probabilities() {
        let locs = LocationSet::from_xy(&[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert!(SpatialSample::new(locs.clone(), vec![1.0], None).is_err());
        assert!(SpatialSample::new(locs.clone(), vec![1.0, 2.0], Some(vec![0.5])).is_err());
        assert!(SpatialSample::new(locs.clone(), vec![1.0, 2.0], Some(vec![0.0, 0.5])).is_err());
        assert!(SpatialSample::new(locs.clone(), vec![1.0, 2.0], Some(vec![1.2, 0.5])).is_err());
        assert!(SpatialSample::new(locs, vec![1.0, 2.0], Some(vec![1.0, 0.5])).is_ok());
    }
}
