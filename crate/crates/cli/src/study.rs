//! Monte-Carlo study: populations, repeated samples, fits and variance ratios.
//!
//! Every random stream is `derive_seed(master_seed, path)`, where the path names
//! the population kind, design, replicate and stage. Results therefore do not
//! depend on the worker count or on scheduling order.

use std::path::Path;

use krigeweight::designs::{draw_sample, DesignSpec, Population, SampleDraw};
use krigeweight::estimation::{fit_variogram, FitConfig, FitResult, WeightScheme};
use krigeweight::geometry::{Location, LocationSet};
use krigeweight::kriging::{
    default_rate_bandwidth, krige_many, smooth_inclusion_rates, KrigingOptions, KrigingSystem, PseudoObservationSet,
    RateSource, SchemeInputs, VarianceScheme,
};
use krigeweight::pointprocess::{draw_pseudo_locations, kde_intensity, GridSpec, KdeBandwidth, PointPattern, PseudoConfig};
use krigeweight::rng::{derive_seed, rng_from_seed};
use krigeweight::synthetic::{simulate_population, PopulationKind, PopulationSpec};
use krigeweight::{SpatialSample, VariogramModel};
use log::{info, warn};
use rand::Rng;
use rayon::prelude::*;

use crate::config::{Design, Estimator, StudyConfig};
use crate::error::{CliError, CliResult};
use crate::io::{fmt, CsvOut};

const STAGE_POPULATION: u64 = 1;
const STAGE_PREDICTION: u64 = 2;
const STAGE_SAMPLE: u64 = 3;
const STAGE_PSEUDO: u64 = 4;

pub const RESULTS_HEADER: [&str; 8] = ["replicate", "population", "design", "estimator", "scheme", "metric", "value", "failure"];
pub const SUMMARY_HEADER: [&str; 13] =
    ["population", "design", "estimator", "scheme", "metric", "n", "mean", "sd", "q05", "q25", "q50", "q75", "q95"];

/// One long-format result. `value` is NaN only when `failure` says why.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub replicate: usize,
    pub population: u32,
    pub design: String,
    pub estimator: String,
    pub scheme: String,
    pub metric: String,
    pub value: f64,
    pub failure: String,
}

/// Population-level reference values: the fit to every unit and the
/// population kriging variance at each prediction point.
#[derive(Debug, Clone)]
pub struct PopulationContext {
    pub kind: PopulationKind,
    pub population: Population,
    pub locations: LocationSet,
    pub base_rate: f64,
    pub fit: FitResult,
    pub predictions: Vec<Location>,
    pub variance: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StudyResults {
    pub populations: Vec<PopulationContext>,
    pub rows: Vec<ResultRow>,
}

impl StudyResults {
    /// Finite values of one metric across replicates, in replicate order.
    pub fn values(&self, population: u32, design: &str, estimator: &str, scheme: &str, metric: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| {
                r.population == population
                    && r.design == design
                    && r.estimator == estimator
                    && r.scheme == scheme
                    && r.metric == metric
                    && r.failure.is_empty()
            })
            .map(|r| r.value)
            .collect()
    }

    pub fn population(&self, kind: PopulationKind) -> Option<&PopulationContext> {
        self.populations.iter().find(|p| p.kind == kind)
    }
}

pub fn population_spec(cfg: &StudyConfig, kind: PopulationKind) -> PopulationSpec {
    PopulationSpec {
        kind,
        grid_nodes: cfg.grid_nodes,
        field_sigma2: cfg.field_sigma2,
        field_range: cfg.field_range,
        noise_tau2: cfg.noise_tau2,
        mean: cfg.mean,
        beta: cfg.beta,
        expected_size: cfg.expected_population,
        base_rate: cfg.base_rate,
        ..Default::default()
    }
}

pub fn design_spec(cfg: &StudyConfig, kind: PopulationKind, design: Design, population_size: usize) -> DesignSpec {
    match design {
        Design::A => DesignSpec::srs(cfg.srs_rate),
        Design::B => DesignSpec::logit(cfg.logit_alpha0, cfg.logit_alpha1),
        Design::C => {
            let alpha1 = match kind {
                PopulationKind::Independent => cfg.inverse_alpha1,
                PopulationKind::Preferential => 0.0,
            };
            let target = cfg.inverse_target_fraction * population_size as f64;
            DesignSpec::inverse_intensity(cfg.inverse_alpha0, alpha1, Some(target))
        }
    }
}

fn fit_config(cfg: &StudyConfig) -> FitConfig {
    FitConfig { max_lag: cfg.max_lag, ..Default::default() }
}

fn kriging_options(cfg: &StudyConfig) -> KrigingOptions {
    KrigingOptions { target: cfg.target, ..Default::default() }
}

/// Sampling intensity at each sample point from a kernel estimate of the
/// sample pattern.
pub fn sample_intensity(sample: &SpatialSample, cfg: &StudyConfig) -> krigeweight::Result<Vec<f64>> {
    let grid = GridSpec::new(krigeweight::Bounds::unit_square(), cfg.kde_grid, cfg.kde_grid)?;
    let surface = kde_intensity(sample.locations().points(), &grid, KdeBandwidth::Scott)?;
    Ok(sample.locations().iter().map(|p| surface.evaluate(p)).collect())
}

pub fn weight_scheme(estimator: Estimator, sample: &SpatialSample, cfg: &StudyConfig) -> krigeweight::Result<WeightScheme> {
    Ok(match estimator {
        Estimator::Cl => WeightScheme::Unit,
        Estimator::Wcl1 => WeightScheme::Survey,
        Estimator::Wcl2 => WeightScheme::Intensity(sample_intensity(sample, cfg)?),
    })
}

fn prepare_population(cfg: &StudyConfig, kind: PopulationKind) -> CliResult<PopulationContext> {
    let k = kind.index() as u64;
    let synthetic = simulate_population(&population_spec(cfg, kind), derive_seed(cfg.master_seed, &[k, STAGE_POPULATION]))?;
    let population = synthetic.population;
    let locations = population.locations()?;
    info!("population {}: {} units", kind.index(), population.len());

    let full = SpatialSample::new(locations.clone(), population.values.clone(), None)?;
    let fit = fit_variogram(&full, &WeightScheme::Unit, None, &fit_config(cfg))?;

    let mut rng = rng_from_seed(derive_seed(cfg.master_seed, &[k, STAGE_PREDICTION]));
    let predictions: Vec<Location> = (0..cfg.prediction_points).map(|_| Location::new(rng.random(), rng.random())).collect();
    let system = KrigingSystem::new(locations.points(), &fit.model, 1.0, cfg.target)?;
    let variance = predictions.iter().map(|p| system.solve_point(p).variance.max(0.0)).collect();
    Ok(PopulationContext { kind, population, locations, base_rate: synthetic.base_rate, fit, predictions, variance })
}

struct Task {
    kind: PopulationKind,
    design: Design,
    replicate: usize,
}

struct Emitter<'a> {
    task: &'a Task,
    rows: Vec<ResultRow>,
}

impl Emitter<'_> {
    fn push(&mut self, estimator: &str, scheme: &str, metric: &str, value: f64) {
        self.rows.push(ResultRow {
            replicate: self.task.replicate,
            population: self.task.kind.index(),
            design: self.task.design.label().into(),
            estimator: estimator.into(),
            scheme: scheme.into(),
            metric: metric.into(),
            value,
            failure: String::new(),
        });
    }

    fn fail(&mut self, estimator: &str, scheme: &str, metric: &str, why: &dyn std::fmt::Display) {
        self.push(estimator, scheme, metric, f64::NAN);
        self.rows.last_mut().expect("row just pushed").failure = why.to_string();
    }
}

fn pseudo_sets(cfg: &StudyConfig, task: &Task, draw: &SampleDraw, ctx: &PopulationContext) -> krigeweight::Result<Vec<PseudoObservationSet>> {
    let sample = &draw.sample;
    let pattern = PointPattern::new(sample.locations().points().to_vec(), krigeweight::Bounds::unit_square())?;
    let rates = match task.design {
        Design::A => None,
        Design::B | Design::C => sample.inclusion_probs(),
    };
    let missing = ctx.population.len() - sample.len();
    let pcfg = PseudoConfig { grid_nx: cfg.kde_grid, grid_ny: cfg.kde_grid, ..Default::default() };
    (0..cfg.pseudo_sets)
        .map(|s| {
            let seed = derive_seed(
                cfg.master_seed,
                &[task.kind.index() as u64, task.design.index(), task.replicate as u64, STAGE_PSEUDO, s as u64],
            );
            draw_pseudo_locations(&pattern, rates, missing, &pcfg, seed)
        })
        .collect()
}

fn scheme_variances(
    scheme: VarianceScheme,
    model: &VariogramModel,
    sample: &SpatialSample,
    ctx: &PopulationContext,
    pseudo: &[PseudoObservationSet],
    cfg: &StudyConfig,
) -> krigeweight::Result<Vec<f64>> {
    let preds = &ctx.predictions;
    let opts = kriging_options(cfg);
    let results = match scheme {
        VarianceScheme::SampleOnly => krige_many(preds, sample, model, &SchemeInputs::SampleOnly, &opts)?,
        VarianceScheme::Population => krige_many(preds, sample, model, &SchemeInputs::Population(&ctx.locations), &opts)?,
        VarianceScheme::Scaled => {
            let rates = sample.inclusion_probs().ok_or(krigeweight::Error::MissingField("inclusion_prob"))?;
            let pts = sample.locations().points();
            let smoothed = smooth_inclusion_rates(pts, rates, preds, default_rate_bandwidth(pts))?;
            let per_point = smoothed.iter().map(|s| s.rate).collect();
            krige_many(preds, sample, model, &SchemeInputs::Scaled(RateSource::PerPoint(per_point)), &opts)?
        }
        VarianceScheme::Simulated => krige_many(preds, sample, model, &SchemeInputs::Simulated(pseudo), &opts)?,
    };
    Ok(results.iter().map(|r| r.variance).collect())
}

fn run_task(cfg: &StudyConfig, ctx: &PopulationContext, task: &Task) -> Vec<ResultRow> {
    let mut out = Emitter { task, rows: Vec::new() };
    let spec = design_spec(cfg, task.kind, task.design, ctx.population.len());
    let seed = derive_seed(
        cfg.master_seed,
        &[task.kind.index() as u64, task.design.index(), task.replicate as u64, STAGE_SAMPLE],
    );
    let draw = match draw_sample(&ctx.population, &spec, seed) {
        Ok(d) => d,
        Err(e) => {
            out.fail("", "", "sample_size", &e);
            return out.rows;
        }
    };
    out.push("", "", "sample_size", draw.sample.len() as f64);

    let needs_pseudo = cfg.schemes.contains(&VarianceScheme::Simulated);
    let pseudo = if needs_pseudo { Some(pseudo_sets(cfg, task, &draw, ctx)) } else { None };

    for &est in &cfg.estimators {
        let label = est.label();
        let fit = weight_scheme(est, &draw.sample, cfg).and_then(|w| fit_variogram(&draw.sample, &w, None, &fit_config(cfg)));
        let fit = match fit {
            Ok(f) => f,
            Err(e) => {
                for m in ["tau2", "sigma2", "range"] {
                    out.fail(label, "", m, &e);
                }
                continue;
            }
        };
        let [t, s, r] = fit.model.params();
        out.push(label, "", "tau2", t);
        out.push(label, "", "sigma2", s);
        out.push(label, "", "range", r);
        out.push(label, "", "objective", fit.objective);
        out.push(label, "", "converged", if fit.converged { 1.0 } else { 0.0 });
        out.push(label, "", "iterations", fit.iterations as f64);

        for &scheme in &cfg.schemes {
            let name = scheme.name();
            let sets: &[PseudoObservationSet] = match (&pseudo, scheme) {
                (Some(Err(e)), VarianceScheme::Simulated) => {
                    out.fail(label, name, "variance_ratio", e);
                    continue;
                }
                (Some(Ok(sets)), _) => sets,
                _ => &[],
            };
            match scheme_variances(scheme, &fit.model, &draw.sample, ctx, sets, cfg) {
                Ok(v) => {
                    let ratio = v.iter().zip(&ctx.variance).map(|(a, b)| a / b).sum::<f64>() / v.len() as f64;
                    out.push(label, name, "variance_ratio", ratio);
                }
                Err(e) => out.fail(label, name, "variance_ratio", &e),
            }
        }
    }
    out.rows
}

fn thread_pool(cfg: &StudyConfig) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.effective_threads()?)
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))
}

pub fn run_study(cfg: &StudyConfig) -> CliResult<StudyResults> {
    let pool = thread_pool(cfg)?;
    pool.install(|| {
        let populations: Vec<PopulationContext> = cfg
            .populations
            .par_iter()
            .map(|&kind| prepare_population(cfg, kind))
            .collect::<CliResult<_>>()?;

        let mut tasks = Vec::new();
        for ctx in &populations {
            for &design in &cfg.designs {
                for replicate in 0..cfg.replicates {
                    tasks.push((ctx, Task { kind: ctx.kind, design, replicate }));
                }
            }
        }
        let rows: Vec<ResultRow> = tasks.par_iter().flat_map_iter(|(ctx, task)| run_task(cfg, ctx, task)).collect();
        let failures = rows.iter().filter(|r| !r.failure.is_empty()).count();
        if failures > 0 {
            warn!("{failures} result rows recorded failures");
        }
        Ok(StudyResults { populations, rows })
    })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn summary_rows(rows: &[ResultRow]) -> Vec<Vec<String>> {
    let mut groups: std::collections::BTreeMap<(u32, &str, &str, &str, &str), Vec<f64>> = Default::default();
    for r in rows {
        let values = groups
            .entry((r.population, r.design.as_str(), r.estimator.as_str(), r.scheme.as_str(), r.metric.as_str()))
            .or_default();
        if r.failure.is_empty() {
            values.push(r.value);
        }
    }
    groups
        .into_iter()
        .map(|((pop, design, est, scheme, metric), mut v)| {
            v.sort_by(f64::total_cmp);
            let n = v.len();
            let mean = v.iter().sum::<f64>() / n as f64;
            let sd = if n > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { f64::NAN };
            let mut row = vec![pop.to_string(), design.into(), est.into(), scheme.into(), metric.into(), n.to_string(), fmt(mean), fmt(sd)];
            row.extend([0.05, 0.25, 0.5, 0.75, 0.95].iter().map(|&q| fmt(quantile(&v, q))));
            row
        })
        .collect()
}

/// Writes `results.csv`, `summary.csv`, `population.csv` and `metadata.csv`.
///
/// `timestamp`, when given, becomes a leading `#` comment in the results and
/// summary files and a `generated_at` metadata row; omit it for byte-identical
/// reruns.
pub fn write_study(
    results: &StudyResults,
    metadata: &[(String, String, String)],
    dir: &Path,
    timestamp: Option<&str>,
) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let comment = timestamp.map(|t| format!("generated_at={t}"));

    let mut out = CsvOut::create(&dir.join("results.csv"), comment.as_deref(), &RESULTS_HEADER)?;
    for r in &results.rows {
        out.row([
            r.replicate.to_string(),
            r.population.to_string(),
            r.design.clone(),
            r.estimator.clone(),
            r.scheme.clone(),
            r.metric.clone(),
            fmt(r.value),
            r.failure.clone(),
        ])?;
    }
    out.finish()?;

    let mut out = CsvOut::create(&dir.join("summary.csv"), comment.as_deref(), &SUMMARY_HEADER)?;
    for row in summary_rows(&results.rows) {
        out.row(&row)?;
    }
    out.finish()?;

    let mut out = CsvOut::create(&dir.join("population.csv"), None, &["population", "metric", "value"])?;
    for p in &results.populations {
        let [t, s, r] = p.fit.model.params();
        let k = p.kind.index().to_string();
        for (m, v) in [
            ("size", p.population.len() as f64),
            ("base_rate", p.base_rate),
            ("tau2", t),
            ("sigma2", s),
            ("range", r),
            ("objective", p.fit.objective),
            ("converged", if p.fit.converged { 1.0 } else { 0.0 }),
            ("mean_population_variance", p.variance.iter().sum::<f64>() / p.variance.len() as f64),
        ] {
            out.row([k.clone(), m.to_string(), fmt(v)])?;
        }
    }
    out.finish()?;

    let mut out = CsvOut::create(&dir.join("metadata.csv"), None, &["key", "value", "source"])?;
    for (k, v, s) in metadata {
        out.row([k, v, s])?;
    }
    if let Some(t) = timestamp {
        out.row(["generated_at", t, "runtime"])?;
    }
    out.finish()
}

/// Reads `results.csv` back.
pub fn read_results(path: &Path) -> CliResult<Vec<ResultRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::File { path: path.to_path_buf(), message: e.to_string() })?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::File { path: path.to_path_buf(), message: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    if header != RESULTS_HEADER {
        return Err(CliError::schema(path, 1, "not a results file"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::File { path: path.to_path_buf(), message: e.to_string() })?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |c: &str| CliError::schema(path, line, format!("bad `{c}`"));
        rows.push(ResultRow {
            replicate: rec[0].parse().map_err(|_| bad("replicate"))?,
            population: rec[1].parse().map_err(|_| bad("population"))?,
            design: rec[2].to_string(),
            estimator: rec[3].to_string(),
            scheme: rec[4].to_string(),
            metric: rec[5].to_string(),
            value: rec[6].parse().map_err(|_| bad("value"))?,
            failure: rec[7].to_string(),
        });
    }
    Ok(rows)
}
