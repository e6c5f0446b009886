//! Method-of-moments and kernel-weighted semivariogram estimators.

use crate::error::{Error, Result};
use crate::pointprocess::IntensitySurface;
use crate::sample::SpatialSample;

#[derive(Debug, Clone, PartialEq)]
pub struct LagBin {
    pub lag: f64,
    /// `None` when no pair falls in the bin.
    pub gamma: Option<f64>,
    pub pairs: usize,
}

/// Binned Matheron estimator `γ̂ = ½ mean(v_ij²)`. Bin `k` is `[edges[k], edges[k+1])`;
/// the last bin is closed on the right.
pub fn empirical_semivariogram(sample: &SpatialSample, edges: &[f64]) -> Result<Vec<LagBin>> {
    if edges.len() < 2 || edges[0] < 0.0 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("bin edges must be nonnegative and strictly increasing".into()));
    }
    let nb = edges.len() - 1;
    let mut sums = vec![0.0; nb];
    let mut counts = vec![0usize; nb];
    let pts = sample.locations().points();
    let z = sample.values();
    let last = edges[nb];
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = pts[i].distance(&pts[j]);
            if d < edges[0] || d > last {
                continue;
            }
            // partition_point gives the first edge strictly greater than d
            let k = (edges.partition_point(|&e| e <= d) - 1).min(nb - 1);
            let v = z[i] - z[j];
            sums[k] += v * v;
            counts[k] += 1;
        }
    }
    Ok((0..nb)
        .map(|k| LagBin {
            lag: 0.5 * (edges[k] + edges[k + 1]),
            gamma: (counts[k] > 0).then(|| 0.5 * sums[k] / counts[k] as f64),
            pairs: counts[k],
        })
        .collect())
}

#[inline]
fn gaussian_kernel(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `0.5 × median pairwise distance / number of lags`.
pub fn default_mark_bandwidth(sample: &SpatialSample, n_lags: usize) -> f64 {
    let pts = sample.locations().points();
    let mut d: Vec<f64> = Vec::with_capacity(pts.len() * pts.len().saturating_sub(1) / 2);
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            d.push(pts[i].distance(&pts[j]));
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    let mid = d.len() / 2;
    let (_, median, _) = d.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    0.5 * *median / n_lags.max(1) as f64
}

/// Kernel-smoothed semivariogram with optional per-point weights `a_i`; pair
/// `(i, j)` carries `k((h − d_ij)/b) a_i a_j`. Returned on the semivariogram scale
/// (half the weighted mean squared difference).
pub fn kernel_semivariogram(
    sample: &SpatialSample,
    point_weights: Option<&[f64]>,
    lags: &[f64],
    bandwidth: f64,
) -> Result<Vec<(f64, Option<f64>)>> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidInput(format!("bandwidth must be positive, got {bandwidth}")));
    }
    let n = sample.len();
    if let Some(w) = point_weights {
        if w.len() != n {
            return Err(Error::InvalidInput(format!("{} weights for {n} points", w.len())));
        }
    }
    let pts = sample.locations().points();
    let z = sample.values();
    let mut num = vec![0.0; lags.len()];
    let mut den = vec![0.0; lags.len()];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = pts[i].distance(&pts[j]);
            let a = point_weights.map_or(1.0, |w| w[i] * w[j]);
            let v2 = (z[i] - z[j]).powi(2);
            for (k, &h) in lags.iter().enumerate() {
                let kw = gaussian_kernel((h - d) / bandwidth) * a;
                num[k] += kw * v2;
                den[k] += kw;
            }
        }
    }
    Ok(lags
        .iter()
        .enumerate()
        .map(|(k, &h)| {
            let defined = den[k] > f64::MIN_POSITIVE && num[k].is_finite();
            (h, defined.then(|| 0.5 * num[k] / den[k]))
        })
        .collect())
}

/// Inverse-intensity weighted mark semivariogram. `bandwidth = None` uses
/// [`default_mark_bandwidth`].
pub fn mark_variogram_corrected(
    sample: &SpatialSample,
    intensity: &IntensitySurface,
    lags: &[f64],
    bandwidth: Option<f64>,
) -> Result<Vec<(f64, Option<f64>)>> {
    let lambda: Vec<f64> = sample.locations().iter().map(|p| intensity.evaluate(p)).collect();
    mark_variogram_with_intensities(sample, &lambda, lags, bandwidth)
}

pub fn mark_variogram_with_intensities(
    sample: &SpatialSample,
    intensities: &[f64],
    lags: &[f64],
    bandwidth: Option<f64>,
) -> Result<Vec<(f64, Option<f64>)>> {
    if let Some(i) = intensities.iter().position(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidInput(format!(
            "intensity at sample point {i} is {} (must be positive)",
            intensities[i]
        )));
    }
    let inv: Vec<f64> = intensities.iter().map(|l| 1.0 / l).collect();
    let b = bandwidth.unwrap_or_else(|| default_mark_bandwidth(sample, lags.len()));
    kernel_semivariogram(sample, Some(&inv), lags, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LocationSet;

    #[test]
    fn single_pair_bin() {
        let locs = LocationSet::from_xy(&[(0.0, 0.0), (1.0, 0.0)]).unwrap();
        let s = SpatialSample::new(locs, vec![1.0, 3.0], None).unwrap();
        let bins = empirical_semivariogram(&s, &[0.0, 0.5, 2.0]).unwrap();
        assert_eq!(bins[0].pairs, 0);
        assert_eq!(bins[0].gamma, None);
        assert_eq!(bins[1].gamma, Some(2.0));
        assert_eq!(bins[1].pairs, 1);
    }

    #[test]
    fn constant_sample_is_zero() {
        let coords: Vec<(f64, f64)> = (0..20).map(|k| (k as f64 * 0.1, (k % 3) as f64)).collect();
        let s = SpatialSample::new(LocationSet::from_xy(&coords).unwrap(), vec![4.2; 20], None).unwrap();
        for b in empirical_semivariogram(&s, &[0.0, 0.5, 1.0, 2.0, 4.0]).unwrap() {
            if b.pairs > 0 {
                assert_eq!(b.gamma, Some(0.0));
            }
        }
    }

    #[test]
    fn bad_edges() {
        let s = SpatialSample::new(LocationSet::from_xy(&[(0.0, 0.0)]).unwrap(), vec![1.0], None).unwrap();
        assert!(empirical_semivariogram(&s, &[0.0, 0.0]).is_err());
        assert!(empirical_semivariogram(&s, &[-1.0, 1.0]).is_err());
    }

    #[test]
    fn constant_intensity_matches_unweighted() {
        let coords: Vec<(f64, f64)> = (0..15).map(|k| ((k * 7 % 11) as f64 / 11.0, (k * 3 % 13) as f64 / 13.0)).collect();
        let vals: Vec<f64> = (0..15).map(|k| (k as f64 * 0.7).sin()).collect();
        let s = SpatialSample::new(LocationSet::from_xy(&coords).unwrap(), vals, None).unwrap();
        let lags = [0.1, 0.3, 0.6];
        let a = mark_variogram_with_intensities(&s, &[37.0; 15], &lags, Some(0.1)).unwrap();
        let b = kernel_semivariogram(&s, None, &lags, 0.1).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.1.unwrap() - y.1.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_differences_give_half_square() {
        // Two points: the single contrast is c = 2.
        let s = SpatialSample::new(LocationSet::from_xy(&[(0.0, 0.0), (0.3, 0.4)]).unwrap(), vec![0.0, 2.0], None).unwrap();
        let out = mark_variogram_with_intensities(&s, &[3.0, 5.0], &[0.1, 0.5, 0.9], Some(0.2)).unwrap();
        for (_, g) in out {
            assert!((g.unwrap() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn far_lag_underflows_to_undefined() {
        let s = SpatialSample::new(LocationSet::from_xy(&[(0.0, 0.0), (0.3, 0.4)]).unwrap(), vec![0.0, 2.0], None).unwrap();
        let out = kernel_semivariogram(&s, None, &[1e6], 1e-3).unwrap();
        assert_eq!(out[0].1, None);
    }
}
