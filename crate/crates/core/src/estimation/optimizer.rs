//! Bounded Nelder–Mead simplex minimizer.
//!
//! Bounds are enforced by clamping every trial point into the box. The run
//! stops when the largest vertex-to-vertex distance falls below the diameter
//! tolerance, or when the iteration budget is spent.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadConfig {
    pub max_iter: usize,
    pub diameter_tol: f64,
    /// Offset of the initial simplex vertices along each axis.
    pub initial_step: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self { max_iter: 2000, diameter_tol: 1e-8, initial_step: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn clamp_into(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for k in 0..x.len() {
        x[k] = x[k].clamp(lower[k], upper[k]);
    }
}

fn eval<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64]) -> f64 {
    let v = f(x);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for a in 0..simplex.len() {
        for b in (a + 1)..simplex.len() {
            let s: f64 = simplex[a]
                .iter()
                .zip(&simplex[b])
                .map(|(p, q)| (p - q) * (p - q))
                .sum();
            d = d.max(s.sqrt());
        }
    }
    d
}

/// Minimize `f` inside `[lower, upper]` starting from `x0`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], lower: &[f64], upper: &[f64], config: &NelderMeadConfig) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    assert!(dim >= 1 && lower.len() == dim && upper.len() == dim);

    let mut start = x0.to_vec();
    clamp_into(&mut start, lower, upper);
    let mut simplex = vec![start.clone()];
    for k in 0..dim {
        let mut v = start.clone();
        // Step away from the nearer bound so the vertex stays distinct.
        v[k] = if v[k] + config.initial_step <= upper[k] {
            v[k] + config.initial_step
        } else {
            v[k] - config.initial_step
        };
        clamp_into(&mut v, lower, upper);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(&mut f, v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if diameter(&simplex) < config.diameter_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let worst = dim;
        let mut centroid = vec![0.0; dim];
        for v in &simplex[..worst] {
            for k in 0..dim {
                centroid[k] += v[k] / dim as f64;
            }
        }
        let toward = |coef: f64, from: &[f64]| -> Vec<f64> {
            let mut p: Vec<f64> = (0..dim).map(|k| centroid[k] + coef * (from[k] - centroid[k])).collect();
            clamp_into(&mut p, lower, upper);
            p
        };

        let reflected = toward(-REFLECT, &simplex[worst]);
        let f_r = eval(&mut f, &reflected);

        if f_r < values[0] {
            let expanded = toward(-REFLECT * EXPAND, &simplex[worst]);
            let f_e = eval(&mut f, &expanded);
            if f_e < f_r {
                simplex[worst] = expanded;
                values[worst] = f_e;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_r;
            }
            continue;
        }
        if f_r < values[worst - 1] {
            simplex[worst] = reflected;
            values[worst] = f_r;
            continue;
        }

        let (contracted, f_c, accept) = if f_r < values[worst] {
            let c = toward(-REFLECT * CONTRACT, &simplex[worst]);
            let fc = eval(&mut f, &c);
            let ok = fc <= f_r;
            (c, fc, ok)
        } else {
            let c = toward(CONTRACT, &simplex[worst]);
            let fc = eval(&mut f, &c);
            let ok = fc < values[worst];
            (c, fc, ok)
        };
        if accept {
            simplex[worst] = contracted;
            values[worst] = f_c;
            continue;
        }

        let best = simplex[0].clone();
        for i in 1..=dim {
            let mut p: Vec<f64> = (0..dim).map(|k| best[k] + SHRINK * (simplex[i][k] - best[k])).collect();
            clamp_into(&mut p, lower, upper);
            values[i] = eval(&mut f, &p);
            simplex[i] = p;
        }
    }

    let best = (0..=dim).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    Minimum { x: simplex[best].clone(), value: values[best], iterations, converged }
}
