//! Nearest-neighbour distance distribution (the G-function).

use super::pattern::PointPattern;
use crate::geometry::Location;

/// Distance from each point to its nearest other point.
pub fn nearest_neighbor_distances(points: &[Location]) -> Vec<f64> {
    let n = points.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x));
    let mut nn = vec![f64::INFINITY; n];
    for (rank, &i) in order.iter().enumerate() {
        let p = points[i];
        let mut best = nn[i];
        // sweep right then left, stopping once the x-gap alone exceeds the best
        for &j in &order[rank + 1..] {
            if points[j].x - p.x >= best {
                break;
            }
            best = best.min(p.distance(&points[j]));
        }
        for &j in order[..rank].iter().rev() {
            if p.x - points[j].x >= best {
                break;
            }
            best = best.min(p.distance(&points[j]));
        }
        nn[i] = best;
    }
    nn
}

/// `1 − exp(−λπh²)`, the G-function under complete spatial randomness.
pub fn csr_g(h: f64, intensity: f64) -> f64 {
    1.0 - (-intensity * std::f64::consts::PI * h * h).exp()
}

/// Border-corrected (reduced-sample) empirical G at each radius: only events at
/// least `h` from the window edge enter the denominator. When no event is that
/// far from the edge the uncorrected empirical CDF is reported.
pub fn g_function(pattern: &PointPattern, radii: &[f64]) -> Vec<(f64, f64)> {
    let pts = pattern.points();
    if pts.len() < 2 {
        return radii.iter().map(|&h| (h, f64::NAN)).collect();
    }
    let nn = nearest_neighbor_distances(pts);
    let border: Vec<f64> = pts.iter().map(|p| pattern.bounds().border_distance(p)).collect();
    radii
        .iter()
        .map(|&h| {
            let mut num = 0usize;
            let mut den = 0usize;
            for (d, b) in nn.iter().zip(&border) {
                if *b >= h {
                    den += 1;
                    if *d <= h {
                        num += 1;
                    }
                }
            }
            let g = if den > 0 {
                num as f64 / den as f64
            } else {
                nn.iter().filter(|&&d| d <= h).count() as f64 / nn.len() as f64
            };
            (h, g)
        })
        .collect()
}
