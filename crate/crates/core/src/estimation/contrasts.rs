//! Pairwise contrasts `v_ij = Z(s_i) − Z(s_j)` and their weights.

use log::warn;

use crate::error::{Error, Result};
use crate::sample::SpatialSample;

/// How each pair is weighted in the composite likelihood.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightScheme {
    /// `w_ij = 1`: the plain composite likelihood.
    Unit,
    /// `w_ij = 1 / (p(s_i) p(s_j))` from the sample's inclusion probabilities.
    Survey,
    /// `w_ij = 1 / (λ_s(s_i) λ_s(s_j))`; one sampling-intensity value per sample point.
    Intensity(Vec<f64>),
}

impl WeightScheme {
    pub fn name(&self) -> &'static str {
        match self {
            WeightScheme::Unit => "unit",
            WeightScheme::Survey => "survey",
            WeightScheme::Intensity(_) => "intensity",
        }
    }

    /// Per-point factors whose pairwise product is the pair weight.
    fn point_factors(&self, sample: &SpatialSample) -> Result<Vec<f64>> {
        let n = sample.len();
        match self {
            WeightScheme::Unit => Ok(vec![1.0; n]),
            WeightScheme::Survey => {
                let p = sample
                    .inclusion_probs()
                    .ok_or(Error::MissingField("inclusion_prob (required by survey weights)"))?;
                Ok(p.iter().map(|v| 1.0 / v).collect())
            }
            WeightScheme::Intensity(lambda) => {
                if lambda.len() != n {
                    return Err(Error::InvalidInput(format!(
                        "{} intensity values for {n} sample points",
                        lambda.len()
                    )));
                }
                if let Some(i) = lambda.iter().position(|&l| !(l > 0.0 && l.is_finite())) {
                    return Err(Error::InvalidInput(format!(
                        "intensity at sample point {i} is {} (must be positive)",
                        lambda[i]
                    )));
                }
                Ok(lambda.iter().map(|v| 1.0 / v).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contrast {
    pub i: usize,
    pub j: usize,
    pub diff: f64,
    pub distance: f64,
    pub weight: f64,
}

/// One entry per retained unordered pair `i < j`.
#[derive(Debug, Clone)]
pub struct ContrastSet {
    pub pairs: Vec<Contrast>,
    /// Coincident-location pairs dropped because `γ(0) = 0`.
    pub excluded_coincident: usize,
    /// Pairs beyond the lag cutoff.
    pub excluded_beyond_lag: usize,
}

impl ContrastSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Same pairs with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> ContrastSet {
        let mut out = self.clone();
        for p in &mut out.pairs {
            p.weight *= factor;
        }
        out
    }
}

pub fn build_contrasts(sample: &SpatialSample, scheme: &WeightScheme, max_lag: Option<f64>) -> Result<ContrastSet> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("contrasts need at least 2 points, got {n}")));
    }
    let factors = scheme.point_factors(sample)?;
    let pts = sample.locations().points();
    let z = sample.values();
    let cutoff = max_lag.unwrap_or(f64::INFINITY);

    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    let mut coincident = 0;
    let mut beyond = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = pts[i].distance(&pts[j]);
            if d == 0.0 {
                coincident += 1;
                continue;
            }
            if d > cutoff {
                beyond += 1;
                continue;
            }
            pairs.push(Contrast {
                i,
                j,
                diff: z[i] - z[j],
                distance: d,
                weight: factors[i] * factors[j],
            });
        }
    }
    if coincident > 0 {
        warn!("excluded {coincident} coincident-location pairs from contrasts");
    }
    Ok(ContrastSet { pairs, excluded_coincident: coincident, excluded_beyond_lag: beyond })
}
