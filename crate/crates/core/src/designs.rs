//! Sampling designs over a finite spatial population.

use std::collections::HashMap;

use log::warn;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::geometry::LocationSet;
use crate::pointprocess::PointPattern;
use crate::rng::rng_from_seed;
use crate::sample::SpatialSample;

/// Finite population: locations, responses and optional auxiliary fields.
#[derive(Debug, Clone)]
pub struct Population {
    pub pattern: PointPattern,
    pub values: Vec<f64>,
    /// Latent covariate driving informative designs, `W(s_i)`.
    pub covariate: Option<Vec<f64>>,
    /// Population location intensity `λ(s_i)`.
    pub intensity: Option<Vec<f64>>,
    pub strata: Option<Vec<u32>>,
}

impl Population {
    pub fn new(pattern: PointPattern, values: Vec<f64>) -> Result<Self> {
        if values.len() != pattern.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} population points",
                values.len(),
                pattern.len()
            )));
        }
        Ok(Self { pattern, values, covariate: None, intensity: None, strata: None })
    }

    pub fn with_covariate(mut self, w: Vec<f64>) -> Result<Self> {
        self.check_len(w.len(), "covariate")?;
        self.covariate = Some(w);
        Ok(self)
    }

    pub fn with_intensity(mut self, l: Vec<f64>) -> Result<Self> {
        self.check_len(l.len(), "intensity")?;
        if l.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput("population intensity must be positive".into()));
        }
        self.intensity = Some(l);
        Ok(self)
    }

    pub fn with_strata(mut self, s: Vec<u32>) -> Result<Self> {
        self.check_len(s.len(), "strata")?;
        self.strata = Some(s);
        Ok(self)
    }

    fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len != self.values.len() {
            return Err(Error::InvalidInput(format!(
                "{len} {what} entries for {} population points",
                self.values.len()
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn locations(&self) -> Result<LocationSet> {
        LocationSet::new(self.pattern.points().to_vec())
    }
}

/// Stratum-size thresholds: a unit in a stratum of `N` units gets the rate of
/// the first row with `N >= min_size`. Rows are kept sorted by descending size.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    rows: Vec<(usize, f64)>,
}

impl RateTable {
    pub fn new(mut rows: Vec<(usize, f64)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("rate table is empty".into()));
        }
        if let Some(r) = rows.iter().find(|r| !(r.1 > 0.0 && r.1 <= 1.0)) {
            return Err(Error::InvalidInput(format!("stratum rate {} outside (0, 1]", r.1)));
        }
        rows.sort_by(|a, b| b.0.cmp(&a.0));
        if rows.last().map(|r| r.0) != Some(0) {
            return Err(Error::InvalidInput("rate table must include a row for stratum size 0".into()));
        }
        Ok(Self { rows })
    }

    /// 0.10 for N ≥ 400, 0.15 for 200–399, 0.20 for 100–199, 0.30 for 20–99, 0.40 below 20.
    pub fn wells() -> Self {
        Self::new(vec![(400, 0.10), (200, 0.15), (100, 0.20), (20, 0.30), (0, 0.40)]).unwrap()
    }

    pub fn rate_for(&self, stratum_size: usize) -> f64 {
        self.rows
            .iter()
            .find(|(min, _)| stratum_size >= *min)
            .map(|r| r.1)
            .unwrap_or(self.rows[self.rows.len() - 1].1)
    }

    pub fn rows(&self) -> &[(usize, f64)] {
        &self.rows
    }
}

pub const DEFAULT_LOGIT_ALPHA0: f64 = -1.0;
pub const DEFAULT_LOGIT_ALPHA1: f64 = 1.0;
/// Default expected sample fraction for normalized designs.
pub const DEFAULT_TARGET_FRACTION: f64 = 0.21;

#[derive(Debug, Clone, PartialEq)]
pub enum DesignKind {
    /// `p(s) = k`
    Srs(f64),
    /// `p(s) = logit⁻¹(α₀ + α₁ W(s))`
    Logit { alpha0: f64, alpha1: f64 },
    /// `p(s) ∝ exp(α₀ + α₁ W(s)) / λ(s)`, scaled so `Σ p = target`.
    InverseIntensity { alpha0: f64, alpha1: f64 },
    Stratified(RateTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    pub kind: DesignKind,
    /// Expected sample size used to normalize `InverseIntensity`;
    /// defaults to `0.21 × N`.
    pub target_size: Option<f64>,
}

impl DesignSpec {
    pub fn srs(k: f64) -> Self {
        Self { kind: DesignKind::Srs(k), target_size: None }
    }

    pub fn logit(alpha0: f64, alpha1: f64) -> Self {
        Self { kind: DesignKind::Logit { alpha0, alpha1 }, target_size: None }
    }

    pub fn inverse_intensity(alpha0: f64, alpha1: f64, target_size: Option<f64>) -> Self {
        Self { kind: DesignKind::InverseIntensity { alpha0, alpha1 }, target_size }
    }

    pub fn stratified(table: RateTable) -> Self {
        Self { kind: DesignKind::Stratified(table), target_size: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inclusion {
    pub probs: Vec<f64>,
    /// Units whose raw probability exceeded 1 and was clamped.
    pub clamped: usize,
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Per-unit inclusion probability under `spec`.
pub fn evaluate_inclusion(pop: &Population, spec: &DesignSpec) -> Result<Inclusion> {
    let n = pop.len();
    let raw: Vec<f64> = match &spec.kind {
        DesignKind::Srs(k) => {
            if !(*k > 0.0 && *k <= 1.0) {
                return Err(Error::InvalidInput(format!("SRS rate {k} outside (0, 1]")));
            }
            vec![*k; n]
        }
        DesignKind::Logit { alpha0, alpha1 } => {
            let w = pop.covariate.as_ref().ok_or(Error::MissingField("covariate (required by the logit design)"))?;
            w.iter().map(|wi| logistic(alpha0 + alpha1 * wi)).collect()
        }
        DesignKind::InverseIntensity { alpha0, alpha1 } => {
            let lambda = pop
                .intensity
                .as_ref()
                .ok_or(Error::MissingField("intensity (required by the inverse-intensity design)"))?;
            let unnormalized: Vec<f64> = if *alpha1 == 0.0 {
                lambda.iter().map(|l| alpha0.exp() / l).collect()
            } else {
                let w = pop
                    .covariate
                    .as_ref()
                    .ok_or(Error::MissingField("covariate (required when alpha1 != 0)"))?;
                w.iter().zip(lambda).map(|(wi, l)| (alpha0 + alpha1 * wi).exp() / l).collect()
            };
            let target = spec.target_size.unwrap_or(DEFAULT_TARGET_FRACTION * n as f64);
            let total: f64 = unnormalized.iter().sum();
            if !(target > 0.0 && total > 0.0 && total.is_finite()) {
                return Err(Error::InvalidInput(format!("cannot normalize to expected size {target}")));
            }
            unnormalized.iter().map(|u| u * target / total).collect()
        }
        DesignKind::Stratified(table) => {
            let strata = pop.strata.as_ref().ok_or(Error::MissingField("stratum (required by the stratified design)"))?;
            let mut sizes: HashMap<u32, usize> = HashMap::new();
            for s in strata {
                *sizes.entry(*s).or_default() += 1;
            }
            strata.iter().map(|s| table.rate_for(sizes[s])).collect()
        }
    };

    let mut clamped = 0;
    let mut probs = Vec::with_capacity(n);
    for p in raw {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::InvalidInput(format!("design produced probability {p}")));
        }
        if p > 1.0 {
            clamped += 1;
            probs.push(1.0);
        } else {
            probs.push(p);
        }
    }
    if clamped as f64 > 0.01 * n as f64 {
        warn!("{clamped} of {n} inclusion probabilities exceeded 1 and were clamped");
    }
    Ok(Inclusion { probs, clamped })
}

#[derive(Debug, Clone)]
pub struct SampleDraw {
    pub sample: SpatialSample,
    /// Population indices of the sampled units, ascending.
    pub indices: Vec<usize>,
    pub seed: u64,
    pub inclusion: Inclusion,
}

/// Independent Bernoulli inclusion of every population unit.
pub fn draw_sample(pop: &Population, spec: &DesignSpec, seed: u64) -> Result<SampleDraw> {
    let inclusion = evaluate_inclusion(pop, spec)?;
    draw_with_probs(pop, inclusion, seed)
}

pub fn draw_with_probs(pop: &Population, inclusion: Inclusion, seed: u64) -> Result<SampleDraw> {
    let mut rng = rng_from_seed(seed);
    let indices: Vec<usize> = inclusion
        .probs
        .iter()
        .enumerate()
        .filter_map(|(i, &p)| (rng.random::<f64>() < p).then_some(i))
        .collect();
    if indices.is_empty() {
        return Err(Error::EmptySample(pop.len()));
    }
    let pts = pop.pattern.points();
    let locs = LocationSet::new(indices.iter().map(|&i| pts[i]).collect())?;
    let values = indices.iter().map(|&i| pop.values[i]).collect();
    let probs = indices.iter().map(|&i| inclusion.probs[i]).collect();
    let sample = SpatialSample::new(locs, values, Some(probs))?;
    Ok(SampleDraw { sample, indices, seed, inclusion })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Bounds, Location};

    fn pop(n: usize) -> Population {
        let pts: Vec<Location> = (0..n)
            .map(|k| Location::new((k as f64 * 0.754_877_666).fract(), (k as f64 * 0.569_840_291).fract()))
            .collect();
        let pattern = PointPattern::new(pts, Bounds::unit_square()).unwrap();
        let values = (0..n).map(|k| (k as f64).sin()).collect();
        Population::new(pattern, values).unwrap()
    }

    #[test]
    fn srs_constant() {
        let inc = evaluate_inclusion(&pop(10), &DesignSpec::srs(0.21)).unwrap();
        assert!(inc.probs.iter().all(|&p| p == 0.21));
    }

    #[test]
    fn wells_rate_table() {
        let t = RateTable::wells();
        assert_eq!(t.rate_for(500), 0.10);
        assert_eq!(t.rate_for(400), 0.10);
        assert_eq!(t.rate_for(399), 0.15);
        assert_eq!(t.rate_for(150), 0.20);
        assert_eq!(t.rate_for(50), 0.30);
        assert_eq!(t.rate_for(10), 0.40);
    }

    #[test]
    fn stratified_uses_stratum_sizes() {
        let mut strata = vec![0u32; 500];
        strata.extend(vec![1u32; 50]);
        strata.extend(vec![2u32; 10]);
        let p = pop(560).with_strata(strata).unwrap();
        let inc = evaluate_inclusion(&p, &DesignSpec::stratified(RateTable::wells())).unwrap();
        assert_eq!(inc.probs[0], 0.10);
        assert_eq!(inc.probs[520], 0.30);
        assert_eq!(inc.probs[555], 0.40);
    }

    #[test]
    fn logit_zero_is_half() {
        let p = pop(8).with_covariate(vec![0.3; 8]).unwrap();
        let inc = evaluate_inclusion(&p, &DesignSpec::logit(0.0, 0.0)).unwrap();
        assert!(inc.probs.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn inverse_intensity_normalized_to_target() {
        let n = 200;
        let lambda: Vec<f64> = (0..n).map(|k| 1.0 + (k % 5) as f64).collect();
        let p = pop(n).with_intensity(lambda.clone()).unwrap();
        let inc = evaluate_inclusion(&p, &DesignSpec::inverse_intensity(0.0, 0.0, Some(40.0))).unwrap();
        assert!((inc.probs.iter().sum::<f64>() - 40.0).abs() < 1e-9);
        assert!((inc.probs[0] * lambda[0] - inc.probs[3] * lambda[3]).abs() < 1e-12);
        assert_eq!(inc.clamped, 0);
    }

    #[test]
    fn missing_fields_are_errors() {
        let p = pop(5);
        assert!(matches!(evaluate_inclusion(&p, &DesignSpec::logit(0.0, 1.0)), Err(Error::MissingField(_))));
        assert!(evaluate_inclusion(&p, &DesignSpec::inverse_intensity(0.0, 0.0, None)).is_err());
        assert!(evaluate_inclusion(&p, &DesignSpec::stratified(RateTable::wells())).is_err());
        assert!(evaluate_inclusion(&p, &DesignSpec::srs(0.0)).is_err());
    }

    #[test]
    fn certainty_design_takes_everyone() {
        let p = pop(30);
        let d = draw_sample(&p, &DesignSpec::srs(1.0), 4).unwrap();
        assert_eq!(d.indices, (0..30).collect::<Vec<_>>());
        assert_eq!(d.sample.values(), &p.values[..]);
    }

    #[test]
    fn recorded_probs_match_design_bitwise() {
        let p = pop(300).with_covariate((0..300).map(|k| (k as f64 * 0.1).cos()).collect()).unwrap();
        let spec = DesignSpec::logit(-1.0, 1.0);
        let d = draw_sample(&p, &spec, 77).unwrap();
        let inc = evaluate_inclusion(&p, &spec).unwrap();
        let rec = d.sample.inclusion_probs().unwrap();
        for (k, &i) in d.indices.iter().enumerate() {
            assert_eq!(rec[k].to_bits(), inc.probs[i].to_bits());
        }
        let again = draw_sample(&p, &spec, 77).unwrap();
        assert_eq!(again.indices, d.indices);
    }

    #[test]
    fn empty_draw_is_an_error() {
        let p = pop(3);
        assert!(matches!(draw_sample(&p, &DesignSpec::srs(1e-12), 0), Err(Error::EmptySample(3))));
    }
}
