//! Composite-likelihood variogram fitting.

use super::contrasts::{build_contrasts, ContrastSet, WeightScheme};
use super::objective::{neg_log_wcl_gradient, neg_log_wcl_with, Reduction};
use super::optimizer::{nelder_mead, Minimum, NelderMeadConfig};
use crate::error::{Error, Result};
use crate::sample::SpatialSample;
use crate::variogram::VariogramModel;

/// Box applied to every parameter on the natural scale.
pub const PARAM_LOWER: f64 = 1e-8;
pub const PARAM_UPPER: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub optimizer: NelderMeadConfig,
    /// Pairs farther apart than this are dropped.
    pub max_lag: Option<f64>,
    pub reduction: Reduction,
    /// Extra optimizer passes restarted from the previous optimum.
    pub restarts: usize,
    /// Multipliers on the initial range tried when an optimum is degenerate:
    /// the partial sill has vanished or a parameter sits at the box edge.
    /// The best objective over all starts wins.
    pub fallback_range_factors: Vec<f64>,
    /// Caps the range at this multiple of the largest retained pair distance.
    /// Without a cap the exponential model can drift along the ridge where
    /// `σ²/φ` is constant and both grow without bound.
    pub range_bound_factor: Option<f64>,
    /// Newton steps on the analytic gradient after the simplex search.
    pub polish_steps: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            optimizer: NelderMeadConfig::default(),
            max_lag: None,
            reduction: Reduction::Sequential,
            restarts: 1,
            fallback_range_factors: vec![0.1, 0.01],
            range_bound_factor: Some(2.0),
            polish_steps: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: VariogramModel,
    /// Negative log weighted composite likelihood at `model`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub n_pairs: usize,
    pub excluded_pairs: usize,
}

/// `τ²₀ = σ²₀ = s²/2`, `φ₀ = max pairwise distance / 4`.
pub fn default_initial_model(sample: &SpatialSample) -> Result<VariogramModel> {
    let half_var = (0.5 * sample.sample_variance()).clamp(PARAM_LOWER, PARAM_UPPER);
    let pts = sample.locations().points();
    let mut max_d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            max_d = max_d.max(pts[i].distance(&pts[j]));
        }
    }
    let range = (0.25 * max_d).clamp(PARAM_LOWER, PARAM_UPPER);
    VariogramModel::new(half_var, half_var, range)
}

fn to_log(m: &VariogramModel) -> Vec<f64> {
    m.params().iter().map(|p| p.max(PARAM_LOWER).ln()).collect()
}

fn from_log(x: &[f64]) -> Result<VariogramModel> {
    VariogramModel::new(x[0].exp(), x[1].exp(), x[2].exp())
}

/// Minimize the objective over `(log τ², log σ², log φ)` for prebuilt contrasts.
pub fn fit_contrasts(contrasts: &ContrastSet, init: &VariogramModel, config: &FitConfig) -> Result<FitResult> {
    if contrasts.is_empty() {
        return Err(Error::InvalidInput("no contrasts to fit".into()));
    }
    let lower = [PARAM_LOWER.ln(); 3];
    let mut upper = [PARAM_UPPER.ln(); 3];
    if let Some(factor) = config.range_bound_factor {
        let extent = contrasts.pairs.iter().map(|c| c.distance).fold(0.0, f64::max);
        upper[2] = (factor * extent).clamp(PARAM_LOWER * 10.0, PARAM_UPPER).ln();
    }
    let clamp_range = |m: VariogramModel| -> Result<VariogramModel> {
        VariogramModel::new(m.nugget(), m.partial_sill(), m.range().min(upper[2].exp()))
    };
    let objective = |x: &[f64]| match from_log(x) {
        Ok(m) => neg_log_wcl_with(&m, contrasts, config.reduction).unwrap_or(f64::INFINITY),
        Err(_) => f64::INFINITY,
    };

    let init = clamp_range(*init)?;
    let (mut best, mut iterations) = descend(&objective, &to_log(&init), &lower, &upper, config);
    if is_degenerate(&best.x, &lower, &upper) {
        for factor in &config.fallback_range_factors {
            let start = VariogramModel::new(init.nugget(), init.partial_sill(), (init.range() * factor).max(PARAM_LOWER))?;
            let (alt, its) = descend(&objective, &to_log(&start), &lower, &upper, config);
            iterations += its;
            if alt.value < best.value {
                best = alt;
            }
        }
    }

    if best.converged && !is_degenerate(&best.x, &lower, &upper) {
        best = polish(&objective, contrasts, best, &lower, &upper, config.polish_steps);
    }

    let model = from_log(&best.x)?;
    Ok(FitResult {
        model,
        objective: best.value,
        iterations,
        converged: best.converged && best.value.is_finite(),
        n_pairs: contrasts.len(),
        excluded_pairs: contrasts.excluded_coincident + contrasts.excluded_beyond_lag,
    })
}

/// Nelder–Mead followed by up to `config.restarts` passes from the optimum.
fn descend(objective: &impl Fn(&[f64]) -> f64, x0: &[f64], lower: &[f64], upper: &[f64], config: &FitConfig) -> (Minimum, usize) {
    let mut best = nelder_mead(objective, x0, lower, upper, &config.optimizer);
    let mut iterations = best.iterations;
    for _ in 0..config.restarts {
        if !best.converged {
            break;
        }
        let next = nelder_mead(objective, &best.x, lower, upper, &config.optimizer);
        iterations += next.iterations;
        let improved = next.value < best.value;
        let converged = next.converged;
        if improved || !converged {
            best = next;
        }
        if !improved {
            break;
        }
    }
    (best, iterations)
}

fn log_gradient(contrasts: &ContrastSet, x: &[f64]) -> Option<nalgebra::Vector3<f64>> {
    let g = neg_log_wcl_gradient(&from_log(x).ok()?, contrasts).ok()?;
    g.iter().all(|v| v.is_finite()).then(|| nalgebra::Vector3::from(g))
}

/// Newton steps from an interior simplex optimum. The simplex stops where
/// objective differences drown in rounding; the gradient still resolves the
/// stationary point there. A step is kept only if it shrinks the gradient
/// without raising the objective beyond rounding.
fn polish(
    objective: &impl Fn(&[f64]) -> f64,
    contrasts: &ContrastSet,
    mut best: Minimum,
    lower: &[f64],
    upper: &[f64],
    steps: usize,
) -> Minimum {
    const H: f64 = 1e-4;
    let Some(mut grad) = log_gradient(contrasts, &best.x) else {
        return best;
    };
    for _ in 0..steps {
        let mut hess = nalgebra::Matrix3::zeros();
        for k in 0..3 {
            let (mut up, mut down) = (best.x.clone(), best.x.clone());
            up[k] += H;
            down[k] -= H;
            let (Some(gu), Some(gd)) = (log_gradient(contrasts, &up), log_gradient(contrasts, &down)) else {
                return best;
            };
            hess.set_column(k, &((gu - gd) / (2.0 * H)));
        }
        let hess = (hess + hess.transpose()) / 2.0;
        let Some(chol) = hess.cholesky() else {
            return best;
        };
        let step = chol.solve(&-grad);
        if !(step.norm() < 0.1) {
            return best;
        }
        let x: Vec<f64> = best.x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        if is_degenerate(&x, lower, upper) {
            return best;
        }
        let value = objective(&x);
        let Some(next) = log_gradient(contrasts, &x) else {
            return best;
        };
        if !(value <= best.value + 1e-12 * best.value.abs()) || next.norm() >= grad.norm() {
            return best;
        }
        best.x = x;
        best.value = value;
        grad = next;
        if step.norm() < 1e-12 {
            break;
        }
    }
    best
}

/// Vanished partial sill, or any parameter within a factor `e` of the box.
fn is_degenerate(x: &[f64], lower: &[f64], upper: &[f64]) -> bool {
    let relative_sill = 1.0 / (1.0 + (x[0] - x[1]).exp());
    relative_sill < 1e-3 || x.iter().zip(lower.iter().zip(upper)).any(|(v, (lo, hi))| *v < lo + 1.0 || *v > hi - 1.0)
}

pub fn fit_variogram(
    sample: &SpatialSample,
    scheme: &WeightScheme,
    init: Option<VariogramModel>,
    config: &FitConfig,
) -> Result<FitResult> {
    if sample.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "variogram fitting needs at least 3 points, got {}",
            sample.len()
        )));
    }
    let contrasts = build_contrasts(sample, scheme, config.max_lag)?;
    let init = match init {
        Some(m) => m,
        None => default_initial_model(sample)?,
    };
    fit_contrasts(&contrasts, &init, config)
}
