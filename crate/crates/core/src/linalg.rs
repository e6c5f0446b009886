//! Covariance matrix assembly and Cholesky factorization with diagonal jitter.

use log::debug;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::geometry::Location;
use crate::variogram::VariogramModel;

/// Smallest and largest diagonal jitter, as fractions of the sill.
pub const JITTER_START: f64 = 1e-10;
pub const JITTER_MAX: f64 = 1e-6;

/// Covariance matrix `C(scale · d_ij)`.
pub fn covariance_matrix(locs: &[Location], model: &VariogramModel, distance_scale: f64) -> DMatrix<f64> {
    let n = locs.len();
    let mut c = DMatrix::zeros(n, n);
    let c0 = model.sill();
    for i in 0..n {
        c[(i, i)] = c0;
        for j in (i + 1)..n {
            let v = model.covariance_unchecked(distance_scale * locs[i].distance(&locs[j]));
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    c
}

/// Cross-covariance vector between `target` and every location.
pub fn cross_covariance(locs: &[Location], target: &Location, model: &VariogramModel, distance_scale: f64) -> DVector<f64> {
    DVector::from_iterator(
        locs.len(),
        locs.iter()
            .map(|p| model.covariance_unchecked(distance_scale * p.distance(target))),
    )
}

/// Cholesky factor of a covariance matrix. Plain factorization is tried first,
/// then jitter of `1e-10·sill` on the diagonal escalating by ×10 up to `1e-6·sill`.
#[derive(Debug, Clone)]
pub struct CovarianceFactor {
    chol: Cholesky<f64, Dyn>,
    jitter: f64,
}

impl CovarianceFactor {
    pub fn new(c: DMatrix<f64>, sill: f64) -> Result<Self> {
        let n = c.nrows();
        if let Some(chol) = Cholesky::new(c.clone()) {
            return Ok(Self { chol, jitter: 0.0 });
        }
        let mut frac = JITTER_START;
        while frac <= JITTER_MAX * (1.0 + 1e-9) {
            let jitter = frac * sill;
            let mut m = c.clone();
            for i in 0..n {
                m[(i, i)] += jitter;
            }
            if let Some(chol) = Cholesky::new(m) {
                debug!("cholesky of {n}x{n} needed jitter {jitter:e}");
                return Ok(Self { chol, jitter });
            }
            frac *= 10.0;
        }
        Err(Error::IllConditioned { size: n, max_jitter: JITTER_MAX * sill })
    }

    pub fn from_locations(locs: &[Location], model: &VariogramModel, distance_scale: f64) -> Result<Self> {
        Self::new(covariance_matrix(locs, model, distance_scale), model.sill())
    }

    pub fn n(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    /// Diagonal jitter that was added (zero when none was needed).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    /// Lower-triangular factor `L` with `C = L Lᵀ`.
    pub fn lower(&self) -> DMatrix<f64> {
        self.chol.l()
    }
}
