//! Flat `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored, keys may appear once, and any key
//! outside the documented table is rejected. Every key has a default, listed in
//! [`STUDY_KEYS`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use krigeweight::kriging::{PredictionTarget, VarianceScheme};
use krigeweight::synthetic::PopulationKind;

use crate::error::{CliError, CliResult};

/// Parsed `key -> (value, line)` pairs.
pub type RawConfig = BTreeMap<String, (String, usize)>;

pub fn parse_config(text: &str) -> CliResult<RawConfig> {
    let mut out = RawConfig::new();
    for (k, raw_line) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(CliError::Config { line, message: format!("expected `key = value`, found `{content}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(CliError::Config { line, message: "empty key".into() });
        }
        if let Some((_, first)) = out.get(key) {
            return Err(CliError::Config { line, message: format!("`{key}` already set on line {first}") });
        }
        out.insert(key.to_string(), (value.to_string(), line));
    }
    Ok(out)
}

/// Documented study keys and their defaults.
pub const STUDY_KEYS: &[(&str, &str, &str)] = &[
    ("populations", "1,2", "population kinds: 1 = locations independent of Z, 2 = locations driven by W"),
    ("expected_population", "1000", "expected population size; calibrates the LGCP base rate"),
    ("base_rate", "auto", "LGCP base rate; `auto` calibrates from expected_population"),
    ("grid_nodes", "30", "nodes per axis of the grid carrying the driving Gaussian fields"),
    ("field_sigma2", "0.4", "partial sill of W and U"),
    ("field_range", "0.1", "range of W and U"),
    ("noise_tau2", "0.2", "measurement-error variance"),
    ("mean", "1.0", "mean of Z"),
    ("beta", "1.0", "LGCP log-intensity coefficient"),
    ("designs", "a,b,c", "a = SRS, b = logit in W, c = inverse intensity"),
    ("srs_rate", "0.21", "design (a) inclusion probability"),
    ("logit_alpha0", "-1.0", "design (b) intercept"),
    ("logit_alpha1", "1.0", "design (b) slope on W"),
    ("inverse_alpha0", "-1.0", "design (c) intercept, population 1"),
    ("inverse_alpha1", "1.0", "design (c) slope on W, population 1 (population 2 uses 0)"),
    ("inverse_target_fraction", "0.21", "design (c) expected sample size as a fraction of the population"),
    ("replicates", "30", "samples drawn per population and design"),
    ("estimators", "CL,WCL1,WCL2", "composite-likelihood variants to fit"),
    ("schemes", "sample,scaled,simulated", "kriging variance schemes compared against the population"),
    ("prediction_points", "50", "uniform prediction locations per population"),
    ("pseudo_sets", "1", "pseudo-observation draws averaged by the simulated scheme"),
    ("kde_grid", "128", "grid nodes per axis for intensity estimates"),
    ("max_lag", "none", "pair distance cutoff for fitting"),
    ("target", "observation", "`observation` (prior variance τ²+σ²) or `latent` (σ²)"),
    ("master_seed", "1", "root of every random stream"),
    ("threads", "0", "worker threads, 0 = all cores; KRIGEWEIGHT_THREADS overrides"),
    ("output_dir", "study_out", "results directory"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Design {
    A,
    B,
    C,
}

impl Design {
    pub fn label(&self) -> &'static str {
        match self {
            Design::A => "a",
            Design::B => "b",
            Design::C => "c",
        }
    }

    pub fn index(&self) -> u64 {
        match self {
            Design::A => 0,
            Design::B => 1,
            Design::C => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Estimator {
    Cl,
    Wcl1,
    Wcl2,
}

impl Estimator {
    pub fn label(&self) -> &'static str {
        match self {
            Estimator::Cl => "CL",
            Estimator::Wcl1 => "WCL1",
            Estimator::Wcl2 => "WCL2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CL" | "UNIT" => Some(Estimator::Cl),
            "WCL1" | "SURVEY" => Some(Estimator::Wcl1),
            "WCL2" | "INTENSITY" => Some(Estimator::Wcl2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub populations: Vec<PopulationKind>,
    pub expected_population: f64,
    pub base_rate: Option<f64>,
    pub grid_nodes: usize,
    pub field_sigma2: f64,
    pub field_range: f64,
    pub noise_tau2: f64,
    pub mean: f64,
    pub beta: f64,
    pub designs: Vec<Design>,
    pub srs_rate: f64,
    pub logit_alpha0: f64,
    pub logit_alpha1: f64,
    pub inverse_alpha0: f64,
    pub inverse_alpha1: f64,
    pub inverse_target_fraction: f64,
    pub replicates: usize,
    pub estimators: Vec<Estimator>,
    pub schemes: Vec<VarianceScheme>,
    pub prediction_points: usize,
    pub pseudo_sets: usize,
    pub kde_grid: usize,
    pub max_lag: Option<f64>,
    pub target: PredictionTarget,
    pub master_seed: u64,
    pub threads: usize,
    pub output_dir: PathBuf,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig::from_raw(&RawConfig::new()).expect("defaults parse")
    }
}

fn list<T>(raw: &str, line: usize, key: &str, f: impl Fn(&str) -> Option<T>) -> CliResult<Vec<T>> {
    let items: Vec<&str> = raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(CliError::Config { line, message: format!("`{key}` needs at least one entry") });
    }
    items
        .iter()
        .map(|s| f(s).ok_or_else(|| CliError::Config { line, message: format!("`{key}`: unknown entry `{s}`") }))
        .collect()
}

fn number<T: std::str::FromStr>(raw: &str, line: usize, key: &str) -> CliResult<T> {
    raw.parse().map_err(|_| CliError::Config { line, message: format!("`{key}`: `{raw}` is not a valid number") })
}

fn finite(raw: &str, line: usize, key: &str) -> CliResult<f64> {
    let v: f64 = number(raw, line, key)?;
    if !v.is_finite() {
        return Err(CliError::Config { line, message: format!("`{key}` must be finite") });
    }
    Ok(v)
}

fn positive(raw: &str, line: usize, key: &str) -> CliResult<f64> {
    let v = finite(raw, line, key)?;
    if v <= 0.0 {
        return Err(CliError::Config { line, message: format!("`{key}` must be positive") });
    }
    Ok(v)
}

impl StudyConfig {
    pub fn from_raw(raw: &RawConfig) -> CliResult<Self> {
        for (key, (_, line)) in raw {
            if !STUDY_KEYS.iter().any(|(k, _, _)| k == key) {
                return Err(CliError::Config { line: *line, message: format!("unknown key `{key}`") });
            }
        }
        let get = |key: &str| -> (String, usize) {
            match raw.get(key) {
                Some((v, l)) => (v.clone(), *l),
                None => {
                    let d = STUDY_KEYS.iter().find(|(k, _, _)| *k == key).expect("documented key").1;
                    (d.to_string(), 0)
                }
            }
        };

        let (v, l) = get("populations");
        let populations = list(&v, l, "populations", |s| s.parse().ok().and_then(PopulationKind::from_index))?;
        let (v, l) = get("designs");
        let designs = list(&v, l, "designs", |s| match s {
            "a" | "A" => Some(Design::A),
            "b" | "B" => Some(Design::B),
            "c" | "C" => Some(Design::C),
            _ => None,
        })?;
        let (v, l) = get("estimators");
        let estimators = list(&v, l, "estimators", Estimator::parse)?;
        let (v, l) = get("schemes");
        let schemes = list(&v, l, "schemes", VarianceScheme::parse)?;

        let (v, l) = get("base_rate");
        let base_rate = if v == "auto" { None } else { Some(positive(&v, l, "base_rate")?) };
        let (v, l) = get("max_lag");
        let max_lag = if v == "none" { None } else { Some(positive(&v, l, "max_lag")?) };
        let (v, l) = get("target");
        let target = match v.as_str() {
            "observation" => PredictionTarget::Observation,
            "latent" => PredictionTarget::Latent,
            _ => return Err(CliError::Config { line: l, message: format!("`target`: unknown value `{v}`") }),
        };

        let f = |key: &str| -> CliResult<f64> {
            let (v, l) = get(key);
            finite(&v, l, key)
        };
        let p = |key: &str| -> CliResult<f64> {
            let (v, l) = get(key);
            positive(&v, l, key)
        };
        let u = |key: &str| -> CliResult<usize> {
            let (v, l) = get(key);
            number(&v, l, key)
        };

        let cfg = StudyConfig {
            populations,
            expected_population: p("expected_population")?,
            base_rate,
            grid_nodes: u("grid_nodes")?,
            field_sigma2: p("field_sigma2")?,
            field_range: p("field_range")?,
            noise_tau2: f("noise_tau2")?,
            mean: f("mean")?,
            beta: f("beta")?,
            designs,
            srs_rate: p("srs_rate")?,
            logit_alpha0: f("logit_alpha0")?,
            logit_alpha1: f("logit_alpha1")?,
            inverse_alpha0: f("inverse_alpha0")?,
            inverse_alpha1: f("inverse_alpha1")?,
            inverse_target_fraction: p("inverse_target_fraction")?,
            replicates: u("replicates")?,
            estimators,
            schemes,
            prediction_points: u("prediction_points")?,
            pseudo_sets: u("pseudo_sets")?,
            kde_grid: u("kde_grid")?,
            max_lag,
            target,
            master_seed: {
                let (v, l) = get("master_seed");
                number(&v, l, "master_seed")?
            },
            threads: u("threads")?,
            output_dir: PathBuf::from(get("output_dir").0),
        };
        cfg.validate(raw)?;
        Ok(cfg)
    }

    fn validate(&self, raw: &RawConfig) -> CliResult<()> {
        let line = |key: &str| raw.get(key).map_or(0, |(_, l)| *l);
        let checks = [
            (self.replicates >= 1, "replicates", "must be at least 1"),
            (self.grid_nodes >= 2, "grid_nodes", "must be at least 2"),
            (self.prediction_points >= 1, "prediction_points", "must be at least 1"),
            (self.pseudo_sets >= 1, "pseudo_sets", "must be at least 1"),
            (self.kde_grid >= 2, "kde_grid", "must be at least 2"),
            (self.noise_tau2 >= 0.0, "noise_tau2", "must be nonnegative"),
            (self.srs_rate <= 1.0, "srs_rate", "must be in (0, 1]"),
            (self.inverse_target_fraction <= 1.0, "inverse_target_fraction", "must be in (0, 1]"),
        ];
        for (ok, key, msg) in checks {
            if !ok {
                return Err(CliError::Config { line: line(key), message: format!("`{key}` {msg}") });
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::File { path: path.to_path_buf(), message: e.to_string() })?;
        Self::from_raw(&parse_config(&text)?)
    }

    /// Worker count after applying `KRIGEWEIGHT_THREADS`.
    pub fn effective_threads(&self) -> CliResult<usize> {
        match std::env::var("KRIGEWEIGHT_THREADS") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("KRIGEWEIGHT_THREADS=`{v}` is not a thread count"))),
            Err(_) => Ok(self.threads),
        }
    }

    /// `(key, value)` rows describing the resolved configuration.
    pub fn describe(&self) -> Vec<(String, String)> {
        let join = |v: Vec<&str>| v.join(",");
        vec![
            ("populations".into(), join(self.populations.iter().map(|p| if p.index() == 1 { "1" } else { "2" }).collect())),
            ("expected_population".into(), self.expected_population.to_string()),
            ("base_rate".into(), self.base_rate.map_or("auto".into(), |b| b.to_string())),
            ("grid_nodes".into(), self.grid_nodes.to_string()),
            ("field_sigma2".into(), self.field_sigma2.to_string()),
            ("field_range".into(), self.field_range.to_string()),
            ("noise_tau2".into(), self.noise_tau2.to_string()),
            ("mean".into(), self.mean.to_string()),
            ("beta".into(), self.beta.to_string()),
            ("designs".into(), join(self.designs.iter().map(Design::label).collect())),
            ("srs_rate".into(), self.srs_rate.to_string()),
            ("logit_alpha0".into(), self.logit_alpha0.to_string()),
            ("logit_alpha1".into(), self.logit_alpha1.to_string()),
            ("inverse_alpha0".into(), self.inverse_alpha0.to_string()),
            ("inverse_alpha1".into(), self.inverse_alpha1.to_string()),
            ("inverse_target_fraction".into(), self.inverse_target_fraction.to_string()),
            ("replicates".into(), self.replicates.to_string()),
            ("estimators".into(), join(self.estimators.iter().map(Estimator::label).collect())),
            ("schemes".into(), join(self.schemes.iter().map(VarianceScheme::name).collect())),
            ("prediction_points".into(), self.prediction_points.to_string()),
            ("pseudo_sets".into(), self.pseudo_sets.to_string()),
            ("kde_grid".into(), self.kde_grid.to_string()),
            ("max_lag".into(), self.max_lag.map_or("none".into(), |m| m.to_string())),
            ("target".into(), match self.target {
                PredictionTarget::Observation => "observation".into(),
                PredictionTarget::Latent => "latent".into(),
            }),
            ("master_seed".into(), self.master_seed.to_string()),
        ]
    }
}
