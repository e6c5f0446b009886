//! Ordinary kriging and the population-corrected variance schemes.

use log::warn;

use super::system::{KrigingSystem, PredictionTarget};
use crate::error::{Error, Result};
use crate::geometry::{Location, LocationSet};
use crate::pointprocess::PseudoObservationSet;
use crate::sample::SpatialSample;
use crate::variogram::VariogramModel;

/// Refuse simulated-scheme systems larger than this unless overridden.
pub const DEFAULT_MAX_SIMULATED_N: usize = 20_000;
/// Pre-clamp variances below `-NEGATIVE_TOLERANCE · sill` are reported.
pub const NEGATIVE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarianceScheme {
    /// Sample locations only.
    SampleOnly,
    /// Sample plus known unsampled population locations.
    Population,
    /// Sample locations with distances scaled by `√p(s*)`.
    Scaled,
    /// Sample plus simulated pseudo-observation locations.
    Simulated,
}

impl VarianceScheme {
    pub fn name(&self) -> &'static str {
        match self {
            VarianceScheme::SampleOnly => "sample",
            VarianceScheme::Population => "population",
            VarianceScheme::Scaled => "scaled",
            VarianceScheme::Simulated => "simulated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sample" => Some(VarianceScheme::SampleOnly),
            "population" => Some(VarianceScheme::Population),
            "scaled" => Some(VarianceScheme::Scaled),
            "simulated" => Some(VarianceScheme::Simulated),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrigingOptions {
    pub target: PredictionTarget,
    pub max_simulated_n: usize,
}

impl Default for KrigingOptions {
    fn default() -> Self {
        Self { target: PredictionTarget::Observation, max_simulated_n: DEFAULT_MAX_SIMULATED_N }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrigingResult {
    pub mean: f64,
    /// Clamped at zero.
    pub variance: f64,
    pub scheme: VarianceScheme,
    /// Number of locations in the covariance system that produced the variance.
    pub effective_n: usize,
    /// The unclamped variance was below `-1e-10 · sill`.
    pub negative_variance: bool,
    /// The mean was computed with distance-scaled covariances.
    pub scaled_mean: bool,
}

fn clamp_variance(raw: f64, model: &VariogramModel) -> (f64, bool) {
    let flagged = raw < -NEGATIVE_TOLERANCE * model.sill();
    if flagged {
        warn!("kriging variance {raw:e} is negative beyond rounding; clamped to 0");
    }
    (raw.max(0.0), flagged)
}

pub fn gls_mean(sample: &SpatialSample, model: &VariogramModel) -> Result<f64> {
    KrigingSystem::new(sample.locations().points(), model, 1.0, PredictionTarget::Observation)?.gls_mean(sample.values())
}

fn sample_only(sys: &KrigingSystem, pred: &Location, sample: &SpatialSample, scheme: VarianceScheme, scaled: bool) -> Result<KrigingResult> {
    let sol = sys.solve_point(pred);
    let mean = sys.predict_mean(&sol, sample.values())?;
    let (variance, negative_variance) = clamp_variance(sol.variance, sys.model());
    Ok(KrigingResult { mean, variance, scheme, effective_n: sys.len(), negative_variance, scaled_mean: scaled })
}

pub fn ordinary_kriging(pred: &Location, sample: &SpatialSample, model: &VariogramModel) -> Result<KrigingResult> {
    ordinary_kriging_with(pred, sample, model, &KrigingOptions::default())
}

pub fn ordinary_kriging_with(
    pred: &Location,
    sample: &SpatialSample,
    model: &VariogramModel,
    opts: &KrigingOptions,
) -> Result<KrigingResult> {
    let sys = KrigingSystem::new(sample.locations().points(), model, 1.0, opts.target)?;
    sample_only(&sys, pred, sample, VarianceScheme::SampleOnly, false)
}

/// Ordinary kriging variance with every population location in the system.
/// Needs no response values.
pub fn population_variance(pred: &Location, all_locs: &LocationSet, model: &VariogramModel) -> Result<f64> {
    population_variance_with(pred, all_locs, model, &KrigingOptions::default())
}

pub fn population_variance_with(pred: &Location, all_locs: &LocationSet, model: &VariogramModel, opts: &KrigingOptions) -> Result<f64> {
    let sys = KrigingSystem::new(all_locs.points(), model, 1.0, opts.target)?;
    Ok(clamp_variance(sys.solve_point(pred).variance, model).0)
}

fn check_rate(rate: f64) -> Result<()> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidInput(format!("sampling rate {rate} outside (0, 1]")));
    }
    Ok(())
}

/// Sample-only kriging with every distance, among observations and to the
/// target, multiplied by `√rate_at_pred`.
pub fn scaled_kriging_variance(pred: &Location, sample: &SpatialSample, model: &VariogramModel, rate_at_pred: f64) -> Result<KrigingResult> {
    scaled_kriging_variance_with(pred, sample, model, rate_at_pred, &KrigingOptions::default())
}

pub fn scaled_kriging_variance_with(
    pred: &Location,
    sample: &SpatialSample,
    model: &VariogramModel,
    rate_at_pred: f64,
    opts: &KrigingOptions,
) -> Result<KrigingResult> {
    check_rate(rate_at_pred)?;
    let sys = KrigingSystem::new(sample.locations().points(), model, rate_at_pred.sqrt(), opts.target)?;
    sample_only(&sys, pred, sample, VarianceScheme::Scaled, rate_at_pred != 1.0)
}

fn combined_locations(sample: &SpatialSample, pseudo: &PseudoObservationSet, opts: &KrigingOptions) -> Result<Vec<Location>> {
    let n = sample.len() + pseudo.len();
    if n > opts.max_simulated_n {
        return Err(Error::TooLarge(n));
    }
    let mut all = sample.locations().points().to_vec();
    all.extend_from_slice(pseudo.locations());
    Ok(all)
}

/// Ordinary kriging variance over sample plus pseudo-observation locations.
/// The reported mean is the sample-only kriging mean.
pub fn simulated_kriging_variance(
    pred: &Location,
    sample: &SpatialSample,
    model: &VariogramModel,
    pseudo: &PseudoObservationSet,
) -> Result<KrigingResult> {
    simulated_kriging_variance_with(pred, sample, model, pseudo, &KrigingOptions::default())
}

pub fn simulated_kriging_variance_with(
    pred: &Location,
    sample: &SpatialSample,
    model: &VariogramModel,
    pseudo: &PseudoObservationSet,
    opts: &KrigingOptions,
) -> Result<KrigingResult> {
    let all = combined_locations(sample, pseudo, opts)?;
    let combined = KrigingSystem::new(&all, model, 1.0, opts.target)?;
    let (variance, negative_variance) = clamp_variance(combined.solve_point(pred).variance, model);
    let sample_sys = KrigingSystem::new(sample.locations().points(), model, 1.0, opts.target)?;
    let mean = sample_sys.predict_mean(&sample_sys.solve_point(pred), sample.values())?;
    Ok(KrigingResult {
        mean,
        variance,
        scheme: VarianceScheme::Simulated,
        effective_n: all.len(),
        negative_variance,
        scaled_mean: false,
    })
}

/// Where the scaled scheme gets `p(s*)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RateSource {
    /// Simple random sampling at a known rate.
    Constant(f64),
    /// One rate per prediction point, e.g. from [`super::smooth_inclusion_rates`].
    PerPoint(Vec<f64>),
}

/// Everything a batch prediction needs beyond the sample and model.
#[derive(Debug, Clone)]
pub enum SchemeInputs<'a> {
    SampleOnly,
    Population(&'a LocationSet),
    Scaled(RateSource),
    /// One or more pseudo-observation draws; the variance is averaged over them.
    Simulated(&'a [PseudoObservationSet]),
}

impl SchemeInputs<'_> {
    pub fn scheme(&self) -> VarianceScheme {
        match self {
            SchemeInputs::SampleOnly => VarianceScheme::SampleOnly,
            SchemeInputs::Population(_) => VarianceScheme::Population,
            SchemeInputs::Scaled(_) => VarianceScheme::Scaled,
            SchemeInputs::Simulated(_) => VarianceScheme::Simulated,
        }
    }
}

/// Kriging at many prediction points, factorizing each covariance system once
/// where the scheme allows. Means always come from the sample-only system,
/// except under [`VarianceScheme::Scaled`], which uses the scaled system.
pub fn krige_many(
    preds: &[Location],
    sample: &SpatialSample,
    model: &VariogramModel,
    inputs: &SchemeInputs<'_>,
    opts: &KrigingOptions,
) -> Result<Vec<KrigingResult>> {
    let base = KrigingSystem::new(sample.locations().points(), model, 1.0, opts.target)?;
    let base_solutions: Vec<_> = preds.iter().map(|p| base.solve_point(p)).collect();
    let mut means = Vec::with_capacity(preds.len());
    for sol in &base_solutions {
        means.push(base.predict_mean(sol, sample.values())?);
    }
    let scheme = inputs.scheme();
    let finish = |i: usize, raw: f64, n: usize| -> KrigingResult {
        let (variance, negative_variance) = clamp_variance(raw, model);
        KrigingResult { mean: means[i], variance, scheme, effective_n: n, negative_variance, scaled_mean: false }
    };

    match inputs {
        SchemeInputs::SampleOnly => Ok(base_solutions
            .iter()
            .enumerate()
            .map(|(i, s)| finish(i, s.variance, base.len()))
            .collect()),
        SchemeInputs::Population(all) => {
            let sys = KrigingSystem::new(all.points(), model, 1.0, opts.target)?;
            Ok(preds
                .iter()
                .enumerate()
                .map(|(i, p)| finish(i, sys.solve_point(p).variance, sys.len()))
                .collect())
        }
        SchemeInputs::Scaled(RateSource::Constant(rate)) => {
            check_rate(*rate)?;
            let sys = KrigingSystem::new(sample.locations().points(), model, rate.sqrt(), opts.target)?;
            preds
                .iter()
                .map(|p| sample_only(&sys, p, sample, VarianceScheme::Scaled, *rate != 1.0))
                .collect()
        }
        SchemeInputs::Scaled(RateSource::PerPoint(rates)) => {
            if rates.len() != preds.len() {
                return Err(Error::InvalidInput(format!(
                    "{} rates for {} prediction points",
                    rates.len(),
                    preds.len()
                )));
            }
            preds
                .iter()
                .zip(rates)
                .map(|(p, &r)| scaled_kriging_variance_with(p, sample, model, r, opts))
                .collect()
        }
        SchemeInputs::Simulated(sets) => {
            if sets.is_empty() {
                return Err(Error::InvalidInput("simulated scheme needs at least one pseudo-observation set".into()));
            }
            let mut sums = vec![0.0; preds.len()];
            let mut n_eff = 0;
            for set in sets.iter() {
                let all = combined_locations(sample, set, opts)?;
                let sys = KrigingSystem::new(&all, model, 1.0, opts.target)?;
                n_eff = all.len();
                for (k, p) in preds.iter().enumerate() {
                    sums[k] += sys.solve_point(p).variance;
                }
            }
            Ok(sums
                .iter()
                .enumerate()
                .map(|(i, s)| finish(i, s / sets.len() as f64, n_eff))
                .collect())
        }
    }
}
