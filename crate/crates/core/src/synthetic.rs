//! Synthetic populations: LGCP locations with a Gaussian response.
//!
//! `Z(s) = μ + W(s) + ε(s)`, with `W` a zero-mean exponential GP and
//! `ε ~ N(0, τ²)`. Locations follow an LGCP driven by an independent field `U`
//! (kind 1) or by `W` itself (kind 2). The driving fields are simulated on a
//! coarse node grid and `W` is then drawn at the population points conditional
//! on the grid values.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::designs::Population;
use crate::error::{Error, Result};
use crate::geometry::{Bounds, LocationSet};
use crate::gp::{simulate_gp, simulate_gp_conditional, GpRealization};
use crate::pointprocess::{calibrate_base_rate, simulate_lgcp, GridSpec, IntensitySurface};
use crate::rng::{derive_seed, rng_from_seed};
use crate::variogram::VariogramModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopulationKind {
    /// Locations independent of the response.
    Independent,
    /// Locations driven by the response's own latent field.
    Preferential,
}

impl PopulationKind {
    pub fn from_index(k: u32) -> Option<Self> {
        match k {
            1 => Some(Self::Independent),
            2 => Some(Self::Preferential),
            _ => None,
        }
    }

    pub fn index(&self) -> u32 {
        match self {
            Self::Independent => 1,
            Self::Preferential => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpec {
    pub kind: PopulationKind,
    pub bounds: Bounds,
    /// Nodes per axis of the grid carrying the driving fields.
    pub grid_nodes: usize,
    pub field_sigma2: f64,
    pub field_range: f64,
    pub noise_tau2: f64,
    pub mean: f64,
    pub beta: f64,
    /// Expected population size; sets the LGCP base rate. Ignored when
    /// `base_rate` is given.
    pub expected_size: f64,
    pub base_rate: Option<f64>,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        Self {
            kind: PopulationKind::Independent,
            bounds: Bounds::unit_square(),
            grid_nodes: 30,
            field_sigma2: 0.4,
            field_range: 0.1,
            noise_tau2: 0.2,
            mean: 1.0,
            beta: 1.0,
            expected_size: 1000.0,
            base_rate: None,
        }
    }
}

impl PopulationSpec {
    /// Model of `Z`: nugget τ², partial sill σ², range φ.
    pub fn response_model(&self) -> Result<VariogramModel> {
        VariogramModel::new(self.noise_tau2, self.field_sigma2, self.field_range)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticPopulation {
    /// Response in `values`, `W(s_i)` as covariate, generating LGCP intensity
    /// at each point as intensity.
    pub population: Population,
    pub surface: IntensitySurface,
    pub base_rate: f64,
}

const STAGE_W_GRID: u64 = 1;
const STAGE_U_GRID: u64 = 2;
const STAGE_LOCATIONS: u64 = 3;
const STAGE_W_POINTS: u64 = 4;
const STAGE_NOISE: u64 = 5;

pub fn simulate_population(spec: &PopulationSpec, seed: u64) -> Result<SyntheticPopulation> {
    if spec.grid_nodes < 2 {
        return Err(Error::InvalidInput("population grid needs at least 2 nodes per axis".into()));
    }
    let grid = GridSpec::new(spec.bounds, spec.grid_nodes, spec.grid_nodes)?;
    let nodes = LocationSet::new(grid.nodes())?;
    let latent = VariogramModel::new(0.0, spec.field_sigma2, spec.field_range)?;

    let w_grid = simulate_gp(&nodes, &latent, 0.0, derive_seed(seed, &[STAGE_W_GRID]))?;
    let driver: GpRealization = match spec.kind {
        PopulationKind::Independent => simulate_gp(&nodes, &latent, 0.0, derive_seed(seed, &[STAGE_U_GRID]))?,
        PopulationKind::Preferential => w_grid.clone(),
    };
    let base_rate = match spec.base_rate {
        Some(b) => b,
        None => calibrate_base_rate(&driver, &grid, spec.beta, spec.expected_size)?,
    };
    let (pattern, surface) = simulate_lgcp(&driver, &grid, spec.beta, base_rate, derive_seed(seed, &[STAGE_LOCATIONS]))?;
    if pattern.is_empty() {
        return Err(Error::EmptySample(0));
    }

    let points = LocationSet::new(pattern.points().to_vec())?;
    let w = simulate_gp_conditional(&w_grid, &points, derive_seed(seed, &[STAGE_W_POINTS]))?.values;
    let mut rng = rng_from_seed(derive_seed(seed, &[STAGE_NOISE]));
    let sd = spec.noise_tau2.sqrt();
    let z: Vec<f64> = w
        .iter()
        .map(|wi| spec.mean + wi + sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let lambda: Vec<f64> = pattern.points().iter().map(|p| surface.evaluate(p)).collect();

    let population = Population::new(pattern, z)?.with_covariate(w)?.with_intensity(lambda)?;
    Ok(SyntheticPopulation { population, surface, base_rate })
}
