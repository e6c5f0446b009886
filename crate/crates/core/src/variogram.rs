//! Exponential semivariogram with nugget.
//!
//! ```text
//! γ(0) = 0
//! γ(d) = τ² + σ²(1 − exp(−d/φ))      d > 0
//! C(0) = τ² + σ²
//! C(d) = σ² exp(−d/φ)                 d > 0
//! ```
//!
//! The nugget belongs to the total variance `C(0)`, so `C(d) + γ(d)` equals the
//! sill at every lag, including zero.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariogramModel {
    nugget: f64,
    partial_sill: f64,
    range: f64,
}

impl VariogramModel {
    pub fn new(nugget: f64, partial_sill: f64, range: f64) -> Result<Self> {
        let ok = nugget.is_finite()
            && partial_sill.is_finite()
            && range.is_finite()
            && nugget >= 0.0
            && partial_sill > 0.0
            && range > 0.0;
        if !ok {
            return Err(Error::InvalidInput(format!(
                "variogram requires nugget >= 0, partial sill > 0, range > 0 (got {nugget}, {partial_sill}, {range})"
            )));
        }
        Ok(Self { nugget, partial_sill, range })
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn partial_sill(&self) -> f64 {
        self.partial_sill
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn sill(&self) -> f64 {
        self.nugget + self.partial_sill
    }

    /// `(τ², σ², φ)`
    pub fn params(&self) -> [f64; 3] {
        [self.nugget, self.partial_sill, self.range]
    }

    pub fn semivariogram(&self, d: f64) -> Result<f64> {
        if d < 0.0 || d.is_nan() {
            return Err(Error::NegativeDistance(d));
        }
        Ok(self.semivariogram_unchecked(d))
    }

    pub fn covariance(&self, d: f64) -> Result<f64> {
        if d < 0.0 || d.is_nan() {
            return Err(Error::NegativeDistance(d));
        }
        Ok(self.covariance_unchecked(d))
    }

    /// Hot-path evaluation; caller guarantees `d >= 0`.
    #[inline]
    pub(crate) fn semivariogram_unchecked(&self, d: f64) -> f64 {
        if d == 0.0 {
            0.0
        } else {
            self.nugget + self.partial_sill * (-(-d / self.range).exp_m1())
        }
    }

    #[inline]
    pub(crate) fn covariance_unchecked(&self, d: f64) -> f64 {
        if d == 0.0 {
            self.sill()
        } else {
            self.partial_sill * (-d / self.range).exp()
        }
    }
}
