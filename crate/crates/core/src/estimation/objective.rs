//! Negative log weighted composite likelihood.
//!
//! Each contrast is treated as `v_ij ~ N(0, 2γ(d_ij))`, so up to an additive
//! constant a pair contributes
//!
//! ```text
//! w_ij · ( v_ij² / (4γ(d_ij)) + ½ log γ(d_ij) )
//! ```
//!
//! to the objective. This is half the bracketed expression that is often
//! written with the constants dropped (`v²/(2γ) + log γ`); the minimizer is
//! the same.

use rayon::prelude::*;

use super::contrasts::{Contrast, ContrastSet};
use crate::error::{Error, Result};
use crate::variogram::VariogramModel;

/// Pairs per reduction chunk. Chunk sums are combined in index order, so the
/// result does not depend on the thread count.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Reduction {
    #[default]
    Sequential,
    /// Fixed-size chunks summed in parallel, then combined in order.
    ParallelChunked,
}

#[inline]
fn pair_term(model: &VariogramModel, c: &Contrast) -> Result<f64> {
    let g = model.semivariogram_unchecked(c.distance);
    if !(g > 0.0) {
        return Err(Error::NonPositiveGamma { i: c.i, j: c.j, distance: c.distance, gamma: g });
    }
    Ok(c.weight * (c.diff * c.diff / (4.0 * g) + 0.5 * g.ln()))
}

fn chunk_sum(model: &VariogramModel, chunk: &[Contrast]) -> Result<f64> {
    let mut acc = 0.0;
    for c in chunk {
        acc += pair_term(model, c)?;
    }
    Ok(acc)
}

pub fn neg_log_wcl(model: &VariogramModel, contrasts: &ContrastSet) -> Result<f64> {
    neg_log_wcl_with(model, contrasts, Reduction::Sequential)
}

pub fn neg_log_wcl_with(model: &VariogramModel, contrasts: &ContrastSet, reduction: Reduction) -> Result<f64> {
    match reduction {
        Reduction::Sequential => chunk_sum(model, &contrasts.pairs),
        Reduction::ParallelChunked => {
            let parts: Vec<Result<f64>> = contrasts
                .pairs
                .par_chunks(CHUNK)
                .map(|chunk| chunk_sum(model, chunk))
                .collect();
            let mut acc = 0.0;
            for p in parts {
                acc += p?;
            }
            Ok(acc)
        }
    }
}

/// Gradient with respect to `(log τ², log σ², log φ)`.
pub fn neg_log_wcl_gradient(model: &VariogramModel, contrasts: &ContrastSet) -> Result<[f64; 3]> {
    let (tau2, sig2, phi) = (model.nugget(), model.partial_sill(), model.range());
    let mut grad = [0.0; 3];
    for c in &contrasts.pairs {
        let e = (-c.distance / phi).exp();
        let g = model.semivariogram_unchecked(c.distance);
        if !(g > 0.0) {
            return Err(Error::NonPositiveGamma { i: c.i, j: c.j, distance: c.distance, gamma: g });
        }
        let dterm_dg = c.weight * (0.5 / g - c.diff * c.diff / (4.0 * g * g));
        grad[0] += dterm_dg * tau2;
        grad[1] += dterm_dg * sig2 * (1.0 - e);
        grad[2] += dterm_dg * (-sig2 * e * c.distance / phi);
    }
    Ok(grad)
}
