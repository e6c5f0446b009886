//! Subcommand implementations.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use krigeweight::designs::{draw_sample, DesignSpec, Population, RateTable};
use krigeweight::estimation::{fit_variogram, FitConfig, WeightScheme};
use krigeweight::kriging::{
    default_rate_bandwidth, krige_many, smooth_inclusion_rates, KrigingOptions, PredictionTarget, RateSource,
    SchemeInputs, VarianceScheme,
};
use krigeweight::pointprocess::{
    draw_pseudo_locations, kde_intensity, GridSpec, IntensitySurface, KdeBandwidth, PointPattern, PseudoConfig,
    PseudoObservationSet,
};
use krigeweight::rng::derive_seed;
use krigeweight::{Bounds, Location, LocationSet, SpatialSample, VariogramModel};
use log::{info, warn};

use crate::config::{parse_config, Estimator, StudyConfig, STUDY_KEYS};
use crate::error::{CliError, CliResult};
use crate::io::{self, DataRow, ParamsRow, PredictionRow};
use crate::study::{run_study, write_study};

#[derive(Debug, Parser)]
#[command(name = "krigeweight", version, about = "Variogram fitting and kriging variance under informative sampling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit an exponential variogram by weighted composite likelihood.
    Fit(FitArgs),
    /// Ordinary kriging with a choice of variance scheme.
    Krige(KrigeArgs),
    /// Run the Monte-Carlo study described by a config file.
    SimulateStudy(StudyArgs),
    /// Draw a sample from a population file under a sampling design.
    Sample(SampleArgs),
    /// Kernel estimate of point intensity on a regular grid.
    Intensity(IntensityArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// unit (CL), survey (WCL1) or intensity (WCL2).
    #[arg(long, default_value = "unit")]
    pub scheme: String,
    /// Intensity grid for the intensity scheme; a kernel estimate of the data locations otherwise.
    #[arg(long)]
    pub intensity: Option<PathBuf>,
    #[arg(long)]
    pub max_lag: Option<f64>,
    /// Grid resolution per axis for the fallback kernel estimate.
    #[arg(long, default_value_t = 128)]
    pub kde_grid: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TargetArg {
    Observation,
    Latent,
}

impl From<TargetArg> for PredictionTarget {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Observation => PredictionTarget::Observation,
            TargetArg::Latent => PredictionTarget::Latent,
        }
    }
}

#[derive(Debug, Args)]
pub struct KrigeArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Output of `fit`; the first row is used.
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    /// sample, population, scaled or simulated.
    #[arg(long, default_value = "sample")]
    pub scheme: String,
    /// Every population location, for the population scheme.
    #[arg(long)]
    pub population: Option<PathBuf>,
    /// Constant sampling rate for the scaled scheme; smoothed inclusion probabilities otherwise.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Population size for the simulated scheme.
    #[arg(long)]
    pub population_size: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub pseudo_sets: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "observation")]
    pub target: TargetArg,
    #[arg(long, default_value_t = 128)]
    pub kde_grid: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// Config file; every key takes its default when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides `output_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Leave the generation time out of the outputs.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DesignArg {
    Srs,
    Logit,
    InverseIntensity,
    Stratified,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Population in the data schema.
    #[arg(long)]
    pub population: PathBuf,
    #[arg(long, value_enum)]
    pub design: DesignArg,
    /// Inclusion probability for SRS.
    #[arg(long, default_value_t = krigeweight::designs::DEFAULT_TARGET_FRACTION)]
    pub rate: f64,
    #[arg(long, default_value_t = krigeweight::designs::DEFAULT_LOGIT_ALPHA0, allow_hyphen_values = true)]
    pub alpha0: f64,
    #[arg(long, default_value_t = krigeweight::designs::DEFAULT_LOGIT_ALPHA1, allow_hyphen_values = true)]
    pub alpha1: f64,
    /// Expected sample size for the inverse-intensity design.
    #[arg(long)]
    pub target_size: Option<f64>,
    /// Intensity grid for the inverse-intensity design; a kernel estimate of the population otherwise.
    #[arg(long)]
    pub intensity: Option<PathBuf>,
    /// `min_size,rate` rows for the stratified design; the built-in table otherwise.
    #[arg(long)]
    pub rate_table: Option<PathBuf>,
    #[arg(long, default_value_t = 128)]
    pub kde_grid: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IntensityArgs {
    #[arg(long)]
    pub points: PathBuf,
    /// `scott`, a single bandwidth, or `bx,by`.
    #[arg(long, default_value = "scott")]
    pub bandwidth: String,
    /// Grid nodes as `NxM`.
    #[arg(long, default_value = "64x64")]
    pub grid: String,
    /// `xmin,xmax,ymin,ymax`; the expanded bounding box of the points otherwise.
    #[arg(long, allow_hyphen_values = true)]
    pub bounds: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit(a) => cmd_fit(&a),
        Command::Krige(a) => cmd_krige(&a),
        Command::SimulateStudy(a) => cmd_simulate_study(&a),
        Command::Sample(a) => cmd_sample(&a),
        Command::Intensity(a) => cmd_intensity(&a),
    }
}

/// Bounding box grown by 5% of its larger side, so every point is interior.
pub fn padded_bounds(points: &[Location]) -> CliResult<Bounds> {
    let b = LocationSet::new(points.to_vec())?.bounding_box();
    let side = b.width().max(b.height());
    let margin = if side > 0.0 { 0.05 * side } else { 1.0 };
    Ok(b.expand(margin))
}

fn locations(rows: &[DataRow]) -> Vec<Location> {
    rows.iter().map(DataRow::location).collect()
}

fn to_sample(rows: &[DataRow]) -> CliResult<SpatialSample> {
    let probs: Option<Vec<f64>> = rows.iter().map(|r| r.inclusion_prob).collect();
    if probs.is_none() && rows.iter().any(|r| r.inclusion_prob.is_some()) {
        return Err(CliError::Usage("inclusion_prob must be given for every row or none".into()));
    }
    Ok(SpatialSample::new(LocationSet::new(locations(rows))?, rows.iter().map(|r| r.value).collect(), probs)?)
}

fn kde_at(points: &[Location], at: &[Location], nodes: usize) -> CliResult<Vec<f64>> {
    let grid = GridSpec::new(padded_bounds(points)?, nodes, nodes)?;
    let surface = kde_intensity(points, &grid, KdeBandwidth::Scott)?;
    Ok(at.iter().map(|p| surface.evaluate(p)).collect())
}

fn surface_at(surface: &IntensitySurface, at: &[Location], path: &Path) -> CliResult<Vec<f64>> {
    let bounds = surface.grid().bounds;
    if let Some(p) = at.iter().find(|p| !bounds.contains(p)) {
        return Err(CliError::Usage(format!(
            "point ({}, {}) lies outside the intensity grid in {}",
            p.x,
            p.y,
            path.display()
        )));
    }
    Ok(at.iter().map(|p| surface.evaluate(p)).collect())
}

pub fn cmd_fit(a: &FitArgs) -> CliResult<()> {
    let estimator = Estimator::parse(&a.scheme)
        .ok_or_else(|| CliError::Usage(format!("unknown scheme `{}`; use unit, survey or intensity", a.scheme)))?;
    let rows = io::read_data(&a.data)?;
    let sample = to_sample(&rows)?;
    let weights = match estimator {
        Estimator::Cl => WeightScheme::Unit,
        Estimator::Wcl1 => {
            if sample.inclusion_probs().is_none() {
                return Err(CliError::Usage("the survey scheme needs an inclusion_prob column".into()));
            }
            WeightScheme::Survey
        }
        Estimator::Wcl2 => {
            let pts = sample.locations().points();
            let lambda = match &a.intensity {
                Some(path) => surface_at(&io::read_intensity(path)?, pts, path)?,
                None => kde_at(pts, pts, a.kde_grid)?,
            };
            WeightScheme::Intensity(lambda)
        }
    };
    let config = FitConfig { max_lag: a.max_lag, ..Default::default() };
    let fit = fit_variogram(&sample, &weights, None, &config)?;
    if !fit.converged {
        warn!("optimizer did not converge after {} iterations", fit.iterations);
    }
    let [tau2, sigma2, range] = fit.model.params();
    info!("{}: tau2={tau2} sigma2={sigma2} range={range}", estimator.label());
    io::write_params(
        &a.out,
        &[ParamsRow {
            scheme: estimator.label().into(),
            tau2,
            sigma2,
            range,
            objective: fit.objective,
            converged: fit.converged,
            iterations: fit.iterations,
        }],
    )
}

fn read_model(path: &Path) -> CliResult<VariogramModel> {
    let params = io::read_params(path)?;
    if params.len() > 1 {
        warn!("{} has {} rows; using the first", path.display(), params.len());
    }
    let p = &params[0];
    VariogramModel::new(p.tau2, p.sigma2, p.range).map_err(|e| CliError::schema(path, 2, e.to_string()))
}

pub fn cmd_krige(a: &KrigeArgs) -> CliResult<()> {
    let scheme = VarianceScheme::parse(&a.scheme).ok_or_else(|| {
        CliError::Usage(format!("unknown scheme `{}`; use sample, population, scaled or simulated", a.scheme))
    })?;
    let rows = io::read_data(&a.data)?;
    let sample = to_sample(&rows)?;
    let model = read_model(&a.params)?;
    let pred_rows = io::read_points(&a.pred)?;
    let preds: Vec<Location> = pred_rows.iter().map(|r| Location::new(r.x, r.y)).collect();
    let opts = KrigingOptions { target: a.target.into(), ..Default::default() };

    let population;
    let pseudo: Vec<PseudoObservationSet>;
    let inputs = match scheme {
        VarianceScheme::SampleOnly => SchemeInputs::SampleOnly,
        VarianceScheme::Population => {
            let path = a.population.as_ref().ok_or_else(|| CliError::Usage("the population scheme needs --population".into()))?;
            let pts: Vec<Location> = io::read_points(path)?.iter().map(|r| Location::new(r.x, r.y)).collect();
            population = LocationSet::new(pts)?;
            SchemeInputs::Population(&population)
        }
        VarianceScheme::Scaled => match (a.rate, sample.inclusion_probs()) {
            (Some(rate), _) => SchemeInputs::Scaled(RateSource::Constant(rate)),
            (None, Some(rates)) => {
                let pts = sample.locations().points();
                let smoothed = smooth_inclusion_rates(pts, rates, &preds, default_rate_bandwidth(pts))?;
                SchemeInputs::Scaled(RateSource::PerPoint(smoothed.iter().map(|s| s.rate).collect()))
            }
            (None, None) => {
                return Err(CliError::Usage("the scaled scheme needs --rate or an inclusion_prob column".into()));
            }
        },
        VarianceScheme::Simulated => {
            let n = match (a.population_size, &a.population) {
                (Some(n), _) => n,
                (None, Some(path)) => io::read_points(path)?.len(),
                (None, None) => {
                    return Err(CliError::Usage(
                        "the simulated scheme needs --population-size or --population".into(),
                    ))
                }
            };
            if n < sample.len() {
                return Err(CliError::Usage(format!("population size {n} is below the sample size {}", sample.len())));
            }
            let pts = sample.locations().points();
            let pattern = PointPattern::new(pts.to_vec(), padded_bounds(pts)?)?;
            let cfg = PseudoConfig { grid_nx: a.kde_grid, grid_ny: a.kde_grid, ..Default::default() };
            pseudo = (0..a.pseudo_sets)
                .map(|k| draw_pseudo_locations(&pattern, sample.inclusion_probs(), n - sample.len(), &cfg, derive_seed(a.seed, &[k as u64])))
                .collect::<krigeweight::Result<_>>()?;
            SchemeInputs::Simulated(&pseudo)
        }
    };
    let results = krige_many(&preds, &sample, &model, &inputs, &opts)?;
    let flagged = results.iter().filter(|r| r.negative_variance).count();
    if flagged > 0 {
        warn!("{flagged} variances were negative beyond tolerance and clamped to zero");
    }
    let out: Vec<PredictionRow> = pred_rows
        .iter()
        .zip(&results)
        .map(|(p, r)| PredictionRow {
            id: p.id.clone(),
            x: p.x,
            y: p.y,
            mean: r.mean,
            variance: r.variance,
            scheme: scheme.name().into(),
            effective_n: r.effective_n,
            seed: a.seed,
        })
        .collect();
    io::write_predictions(&a.out, &out)
}

fn timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

pub fn cmd_simulate_study(a: &StudyArgs) -> CliResult<()> {
    let raw = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::File { path: path.clone(), message: e.to_string() })?;
            parse_config(&text)?
        }
        None => Default::default(),
    };
    let mut cfg = StudyConfig::from_raw(&raw)?;
    if let Some(out) = &a.out {
        cfg.output_dir = out.clone();
    }
    let mut metadata: Vec<(String, String, String)> = cfg
        .describe()
        .into_iter()
        .map(|(k, v)| {
            let source = if raw.contains_key(&k) { "config" } else { "default" };
            (k, v, source.to_string())
        })
        .collect();
    debug_assert!(metadata.iter().all(|(k, _, _)| STUDY_KEYS.iter().any(|(s, _, _)| s == k)));
    metadata.push(("version".into(), env!("CARGO_PKG_VERSION").into(), "build".into()));

    let results = run_study(&cfg)?;
    let stamp = (!a.no_timestamp).then(timestamp);
    write_study(&results, &metadata, &cfg.output_dir, stamp.as_deref())?;
    info!("wrote {} result rows to {}", results.rows.len(), cfg.output_dir.display());
    Ok(())
}

fn read_rate_table(path: &Path) -> CliResult<RateTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::File { path: path.to_path_buf(), message: e.to_string() })?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::File { path: path.to_path_buf(), message: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    if header != ["min_size", "rate"] {
        return Err(CliError::schema(path, 1, "expected header `min_size,rate`"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::File { path: path.to_path_buf(), message: e.to_string() })?;
        let line = rec.position().map_or(0, |p| p.line());
        let size = rec[0].parse().map_err(|_| CliError::schema(path, line, format!("bad min_size `{}`", &rec[0])))?;
        let rate = rec[1].parse().map_err(|_| CliError::schema(path, line, format!("bad rate `{}`", &rec[1])))?;
        rows.push((size, rate));
    }
    RateTable::new(rows).map_err(|e| CliError::schema(path, 1, e.to_string()))
}

pub fn cmd_sample(a: &SampleArgs) -> CliResult<()> {
    let rows = io::read_data(&a.population)?;
    let pts = locations(&rows);
    let pattern = PointPattern::new(pts.clone(), padded_bounds(&pts)?)?;
    let mut pop = Population::new(pattern, rows.iter().map(|r| r.value).collect())?;
    let spec = match a.design {
        DesignArg::Srs => DesignSpec::srs(a.rate),
        DesignArg::Logit => {
            let w: Option<Vec<f64>> = rows.iter().map(|r| r.covariate).collect();
            let w = w.ok_or_else(|| CliError::Usage("the logit design needs a covariate column".into()))?;
            pop = pop.with_covariate(w)?;
            DesignSpec::logit(a.alpha0, a.alpha1)
        }
        DesignArg::InverseIntensity => {
            let lambda = match &a.intensity {
                Some(path) => surface_at(&io::read_intensity(path)?, &pts, path)?,
                None => kde_at(&pts, &pts, a.kde_grid)?,
            };
            pop = pop.with_intensity(lambda)?;
            if a.alpha1 != 0.0 {
                let w: Option<Vec<f64>> = rows.iter().map(|r| r.covariate).collect();
                let w = w.ok_or_else(|| {
                    CliError::Usage("the inverse-intensity design needs a covariate column unless --alpha1 0".into())
                })?;
                pop = pop.with_covariate(w)?;
            }
            DesignSpec::inverse_intensity(a.alpha0, a.alpha1, a.target_size)
        }
        DesignArg::Stratified => {
            let labels: Option<Vec<&str>> = rows.iter().map(|r| r.stratum.as_deref()).collect();
            let labels = labels.ok_or_else(|| CliError::Usage("the stratified design needs a stratum column".into()))?;
            let mut ids: HashMap<&str, u32> = HashMap::new();
            let strata = labels
                .iter()
                .map(|l| {
                    let next = ids.len() as u32;
                    *ids.entry(l).or_insert(next)
                })
                .collect();
            pop = pop.with_strata(strata)?;
            let table = match &a.rate_table {
                Some(path) => read_rate_table(path)?,
                None => RateTable::wells(),
            };
            DesignSpec::stratified(table)
        }
    };
    let draw = draw_sample(&pop, &spec, a.seed)?;
    info!("drew {} of {} units", draw.indices.len(), rows.len());
    let out: Vec<DataRow> = draw
        .indices
        .iter()
        .map(|&i| DataRow { inclusion_prob: Some(draw.inclusion.probs[i]), ..rows[i].clone() })
        .collect();
    io::write_data(&a.out, &out)
}

fn parse_bandwidth(s: &str) -> CliResult<KdeBandwidth> {
    let bad = || CliError::Usage(format!("bandwidth `{s}` is not `scott`, a number or `bx,by`"));
    if s.eq_ignore_ascii_case("scott") {
        return Ok(KdeBandwidth::Scott);
    }
    let parts: Vec<f64> = s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<CliResult<_>>()?;
    match parts[..] {
        [b] => Ok(KdeBandwidth::Fixed(b)),
        [bx, by] => Ok(KdeBandwidth::PerAxis(bx, by)),
        _ => Err(bad()),
    }
}

fn parse_grid(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Usage(format!("grid `{s}` is not `NxM`"));
    let (n, m) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((n.trim().parse().map_err(|_| bad())?, m.trim().parse().map_err(|_| bad())?))
}

fn parse_bounds(s: &str) -> CliResult<Bounds> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| CliError::Usage(format!("bounds `{s}` are not `xmin,xmax,ymin,ymax`"))))
        .collect::<CliResult<_>>()?;
    match v[..] {
        [x0, x1, y0, y1] => Bounds::new(x0, x1, y0, y1).map_err(|e| CliError::Usage(e.to_string())),
        _ => Err(CliError::Usage(format!("bounds `{s}` are not `xmin,xmax,ymin,ymax`"))),
    }
}

pub fn cmd_intensity(a: &IntensityArgs) -> CliResult<()> {
    let pts: Vec<Location> = io::read_points(&a.points)?.iter().map(|r| Location::new(r.x, r.y)).collect();
    let (nx, ny) = parse_grid(&a.grid)?;
    let bounds = match &a.bounds {
        Some(s) => parse_bounds(s)?,
        None => padded_bounds(&pts)?,
    };
    let grid = GridSpec::new(bounds, nx, ny)?;
    let surface = kde_intensity(&pts, &grid, parse_bandwidth(&a.bandwidth)?)?;
    io::write_intensity(&a.out, &surface)
}
