//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the report.
//! Tolerances, replicate counts and the study seed are pinned below.

use std::path::Path;
use std::time::{Duration, Instant};

use krigeweight::estimation::{build_contrasts, fit_variogram, neg_log_wcl, FitConfig, WeightScheme};
use krigeweight::geometry::{Bounds, Location, LocationSet};
use krigeweight::kriging::{
    ordinary_kriging, population_variance, scaled_kriging_variance, simulated_kriging_variance,
};
use krigeweight::pointprocess::{
    csr_g, draw_pseudo_locations, g_function, GridSpec, IntensitySurface, PointPattern, PseudoConfig,
    PseudoObservationSet, simulate_inhomogeneous_poisson,
};
use krigeweight::rng::{derive_seed, rng_from_seed};
use krigeweight::synthetic::PopulationKind;
use krigeweight::{simulate_gp, SpatialSample, VariogramModel};
use krigeweight_cli::config::{Design, Estimator, StudyConfig};
use krigeweight_cli::io::{self, DataRow, ParamsRow, PointRow, PredictionRow};
use krigeweight_cli::study::{read_results, run_study, StudyResults};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};
use tempfile::TempDir;

/// Master seed of the calibration and variance-ratio studies, fixed once.
const STUDY_SEED: u64 = 20240611;
const REPLICATES: usize = 30;
const ALPHA: f64 = 0.05;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(k: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = f();
    let elapsed = t.elapsed();
    let in_time = elapsed <= budget;
    let pass = out.pass && in_time;
    println!(
        "criterion {k} [{name}]: {} ({:.1}s of {}s) {}{}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs(),
        out.detail,
        if in_time { "" } else { " | over time budget" }
    );
    pass
}

mod oracle {
    //! Dense ordinary kriging with an explicit Gauss-Jordan inverse.

    pub fn cov(d: f64, p: (f64, f64, f64)) -> f64 {
        if d == 0.0 {
            p.0 + p.1
        } else {
            p.1 * (-d / p.2).exp()
        }
    }

    fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
        ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
    }

    fn inverse(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = m.len();
        let mut a: Vec<Vec<f64>> = m
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
                r
            })
            .collect();
        for col in 0..n {
            let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
            a.swap(col, piv);
            let p = a[col][col];
            for v in a[col].iter_mut() {
                *v /= p;
            }
            for r in 0..n {
                if r != col {
                    let f = a[r][col];
                    for c in 0..2 * n {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        a.into_iter().map(|r| r[n..].to_vec()).collect()
    }

    /// (mean, variance) with every distance multiplied by `scale`.
    pub fn krige(pts: &[(f64, f64)], z: &[f64], pred: (f64, f64), p: (f64, f64, f64), scale: f64) -> (f64, f64) {
        let n = pts.len();
        let c: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| cov(scale * dist(pts[i], pts[j]), p)).collect()).collect();
        let ci = inverse(&c);
        let cs: Vec<f64> = pts.iter().map(|q| cov(scale * dist(*q, pred), p)).collect();
        let ci1: Vec<f64> = (0..n).map(|i| ci[i].iter().sum()).collect();
        let one_ci_one: f64 = ci1.iter().sum();
        let ci_cs: Vec<f64> = (0..n).map(|i| (0..n).map(|j| ci[i][j] * cs[j]).sum()).collect();
        let quad: f64 = (0..n).map(|i| cs[i] * ci_cs[i]).sum();
        let one_ci_cs: f64 = ci_cs.iter().sum();
        let var = p.0 + p.1 - quad + (1.0 - one_ci_cs).powi(2) / one_ci_one;
        let mean = if z.is_empty() {
            f64::NAN
        } else {
            let mu = (0..n).map(|i| ci1[i] * z[i]).sum::<f64>() / one_ci_one;
            mu + (0..n).map(|i| ci_cs[i] * (z[i] - mu)).sum::<f64>()
        };
        (mean, var)
    }
}

fn criterion_1() -> Outcome {
    let mut rng = rng_from_seed(101);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let total = rng.random_range(2..=6);
        let m = rng.random_range(1..total);
        let pts: Vec<(f64, f64)> = (0..total).map(|_| (rng.random(), rng.random())).collect();
        let z: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let p = (rng.random_range(0.0..0.5), rng.random_range(0.1..1.0), rng.random_range(0.05..0.5));
        let model = VariogramModel::new(p.0, p.1, p.2).unwrap();
        let pred = (rng.random(), rng.random());
        let pl = Location::new(pred.0, pred.1);
        let s = SpatialSample::new(LocationSet::from_xy(&pts[..m]).unwrap(), z.clone(), None).unwrap();
        let rate = rng.random_range(0.05..1.0);

        let ok = ordinary_kriging(&pl, &s, &model).unwrap();
        let (em, ev) = oracle::krige(&pts[..m], &z, pred, p, 1.0);
        let pv = population_variance(&pl, &LocationSet::from_xy(&pts).unwrap(), &model).unwrap();
        let (_, epv) = oracle::krige(&pts, &[], pred, p, 1.0);
        let sc = scaled_kriging_variance(&pl, &s, &model, rate).unwrap();
        let (sm, sv) = oracle::krige(&pts[..m], &z, pred, p, rate.sqrt());
        let pseudo = PseudoObservationSet::from_locations(LocationSet::from_xy(&pts[m..]).unwrap().into_vec());
        let sim = simulated_kriging_variance(&pl, &s, &model, &pseudo).unwrap();
        for err in [
            ok.mean - em,
            ok.variance - ev,
            pv - epv,
            sc.mean - sm,
            sc.variance - sv,
            sim.mean - em,
            sim.variance - epv,
        ] {
            worst = worst.max(err.abs());
        }
    }
    Outcome { pass: worst < 1e-9, detail: format!("200 configurations, max abs error {worst:.2e} (limit 1e-9)") }
}

fn criterion_2() -> Outcome {
    let mut errs = Vec::new();
    let model = VariogramModel::new(0.2, 0.4, 0.1).unwrap();
    let term = |v: f64, g: f64| v * v / (4.0 * g) + 0.5 * g.ln();
    let g1 = 0.2 + 0.4 * (1.0 - (-1.0f64).exp());
    let g2 = 0.2 + 0.4 * (1.0 - (-2.0f64).exp());

    let one = SpatialSample::new(LocationSet::from_xy(&[(0.0, 0.0), (0.1, 0.0)]).unwrap(), vec![0.0, 2.0], Some(vec![0.5, 0.25])).unwrap();
    let c = build_contrasts(&one, &WeightScheme::Unit, None).unwrap();
    errs.push(neg_log_wcl(&model, &c).unwrap() - term(2.0, g1));
    let c = build_contrasts(&one, &WeightScheme::Survey, None).unwrap();
    errs.push(neg_log_wcl(&model, &c).unwrap() - 8.0 * term(2.0, g1));

    let three = SpatialSample::new(LocationSet::from_xy(&[(0.0, 0.0), (0.1, 0.0), (0.2, 0.0)]).unwrap(), vec![1.0, -1.0, 0.5], None).unwrap();
    let c = build_contrasts(&three, &WeightScheme::Unit, None).unwrap();
    errs.push(neg_log_wcl(&model, &c).unwrap() - (term(2.0, g1) + term(0.5, g2) + term(-1.5, g1)));
    let c = build_contrasts(&three, &WeightScheme::Intensity(vec![2.0, 4.0, 0.5]), None).unwrap();
    errs.push(neg_log_wcl(&model, &c).unwrap() - (term(2.0, g1) / 8.0 + term(0.5, g2) + term(-1.5, g1) / 2.0));
    let hand = errs.iter().fold(0.0f64, |a, e| a.max(e.abs()));

    // Unit weights against an independently summed unweighted objective.
    let mut rng = rng_from_seed(102);
    let locs = LocationSet::new((0..40).map(|_| Location::new(rng.random(), rng.random())).collect()).unwrap();
    let z = simulate_gp(&locs, &model, 1.0, 103).unwrap().values;
    let s = SpatialSample::new(locs.clone(), z.clone(), None).unwrap();
    let probe = VariogramModel::new(0.3, 0.5, 0.2).unwrap();
    let mut manual = 0.0;
    for i in 0..40 {
        for j in (i + 1)..40 {
            manual += term(z[i] - z[j], probe.semivariogram(locs.get(i).distance(&locs.get(j))).unwrap());
        }
    }
    let unit = neg_log_wcl(&probe, &build_contrasts(&s, &WeightScheme::Unit, None).unwrap()).unwrap();
    let unit_err = (unit - manual).abs() / manual.abs();

    // Constant survey and intensity weights rescale the objective only. The
    // sample is large enough that the range is identified; with 40 points the
    // fitted range falls below every pair distance and only τ² + σ² is pinned.
    let mut rng = rng_from_seed(104);
    let locs = LocationSet::new((0..150).map(|_| Location::new(rng.random(), rng.random())).collect()).unwrap();
    let z = simulate_gp(&locs, &model, 1.0, 105).unwrap().values;
    let s = SpatialSample::new(locs, z, None).unwrap();
    let base = fit_variogram(&s, &WeightScheme::Unit, None, &FitConfig::default()).unwrap().model.params();
    let srs = s.with_inclusion_probs(vec![0.21; 150]).unwrap();
    let mut shift: f64 = 0.0;
    for scheme in [WeightScheme::Survey, WeightScheme::Intensity(vec![37.0; 150])] {
        let p = fit_variogram(&srs, &scheme, None, &FitConfig::default()).unwrap().model.params();
        for (a, b) in base.iter().zip(p) {
            shift = shift.max((a.ln() - b.ln()).abs() / a.ln().abs());
        }
    }
    Outcome {
        pass: hand < 1e-12 && unit_err < 1e-12 && shift < 1e-6,
        detail: format!(
            "hand cases max error {hand:.1e} (limit 1e-12), unit vs manual rel {unit_err:.1e}, argmin shift {shift:.1e} relative in log params (limit 1e-6)"
        ),
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// One-sided paired t-test p-value for mean(d) > 0.
fn paired_p(d: &[f64]) -> f64 {
    let n = d.len() as f64;
    let m = mean(d);
    let sd = (d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if sd == 0.0 {
        return if m > 0.0 { 0.0 } else { 1.0 };
    }
    1.0 - StudentsT::new(0.0, 1.0, n - 1.0).unwrap().cdf(m / (sd / n.sqrt()))
}

const PARAMS: [&str; 3] = ["tau2", "sigma2", "range"];

fn estimates(r: &StudyResults, pop: u32, design: &str, est: &str, param: &str) -> Vec<f64> {
    r.values(pop, design, est, "", param)
}

fn calibration_study(populations: Vec<PopulationKind>, designs: Vec<Design>) -> StudyResults {
    let cfg = StudyConfig {
        populations,
        designs,
        replicates: REPLICATES,
        estimators: vec![Estimator::Cl, Estimator::Wcl1, Estimator::Wcl2],
        schemes: vec![],
        prediction_points: 1,
        master_seed: STUDY_SEED,
        ..Default::default()
    };
    run_study(&cfg).unwrap()
}

fn criterion_3() -> Outcome {
    let r1 = calibration_study(vec![PopulationKind::Independent], vec![Design::A, Design::B, Design::C]);
    let r2 = calibration_study(vec![PopulationKind::Preferential], vec![Design::A]);
    let pf1 = r1.population(PopulationKind::Independent).unwrap().fit.model.params();
    let pf2 = r2.population(PopulationKind::Preferential).unwrap().fit.model.params();
    let mut notes = vec![format!("population 1 fit {pf1:.3?}, population 2 fit {pf2:.3?}")];

    // (i) design a: CL mean within 15% of the population fit.
    let mut pass_i = true;
    let mut rel = Vec::new();
    for (k, p) in PARAMS.iter().enumerate() {
        let v = estimates(&r1, 1, "a", "CL", p);
        let b = (mean(&v) - pf1[k]).abs() / pf1[k];
        pass_i &= v.len() == REPLICATES && b < 0.15;
        rel.push(b);
    }
    let medians: Vec<f64> = PARAMS
        .iter()
        .enumerate()
        .map(|(k, p)| median(estimates(&r1, 1, "a", "CL", p)) / pf1[k] - 1.0)
        .collect();
    notes.push(format!("(i) CL relative bias {rel:.3?} (limit 0.15), median relative deviation {medians:.3?}: {}", verdict(pass_i)));

    // (ii) design b: WCL1 mean absolute error below CL, paired one-sided test.
    let mut pass_ii = true;
    let mut parts = Vec::new();
    for (k, p) in PARAMS.iter().enumerate() {
        let cl = estimates(&r1, 1, "b", "CL", p);
        let w1 = estimates(&r1, 1, "b", "WCL1", p);
        let d: Vec<f64> = cl.iter().zip(&w1).map(|(a, b)| (a - pf1[k]).abs() - (b - pf1[k]).abs()).collect();
        let (mae_cl, mae_w1) = (mean(&cl.iter().map(|a| (a - pf1[k]).abs()).collect::<Vec<_>>()), mean(&w1.iter().map(|b| (b - pf1[k]).abs()).collect::<Vec<_>>()));
        let pv = paired_p(&d);
        pass_ii &= cl.len() == REPLICATES && w1.len() == REPLICATES && mae_w1 < mae_cl && pv < ALPHA;
        parts.push(format!("{p} CL {mae_cl:.4} vs WCL1 {mae_w1:.4} p={pv:.3}"));
    }
    notes.push(format!("(ii) mean absolute bias {}: {}", parts.join(", "), verdict(pass_ii)));
    let signed: Vec<String> = PARAMS
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let m: Vec<f64> = ["CL", "WCL1"].iter().map(|e| mean(&estimates(&r1, 1, "b", e, p)) / pf1[k] - 1.0).collect();
            format!("{p} {m:.3?}")
        })
        .collect();
    notes.push(format!("design b relative bias CL/WCL1: {}", signed.join(", ")));

    // (iii) population 2, design a: WCL2 more biased than CL, summed relative error.
    let rel_err = |est: &str| -> Vec<f64> {
        let cols: Vec<Vec<f64>> = PARAMS.iter().map(|p| estimates(&r2, 2, "a", est, p)).collect();
        (0..cols[0].len()).map(|r| (0..3).map(|k| (cols[k][r] - pf2[k]).abs() / pf2[k]).sum()).collect()
    };
    let (cl, w2) = (rel_err("CL"), rel_err("WCL2"));
    let d: Vec<f64> = w2.iter().zip(&cl).map(|(a, b)| a - b).collect();
    let pv = paired_p(&d);
    let pass_iii = cl.len() == REPLICATES && w2.len() == REPLICATES && mean(&w2) > mean(&cl) && pv < ALPHA;
    notes.push(format!(
        "(iii) summed relative error CL {:.3} vs WCL2 {:.3} p={pv:.3}: {}",
        mean(&cl),
        mean(&w2),
        verdict(pass_iii)
    ));

    let design_c: Vec<String> = PARAMS
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let m: Vec<f64> = ["CL", "WCL1", "WCL2"].iter().map(|e| mean(&estimates(&r1, 1, "c", e, p)) / pf1[k] - 1.0).collect();
            format!("{p} {m:.3?}")
        })
        .collect();
    notes.push(format!("design c relative bias CL/WCL1/WCL2: {}", design_c.join(", ")));
    Outcome { pass: pass_i && pass_ii && pass_iii, detail: notes.join("; ") }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn criterion_4() -> Outcome {
    let cfg = StudyConfig {
        populations: vec![PopulationKind::Independent],
        designs: vec![Design::A],
        replicates: REPLICATES,
        estimators: vec![Estimator::Cl],
        schemes: vec![
            krigeweight::kriging::VarianceScheme::SampleOnly,
            krigeweight::kriging::VarianceScheme::Scaled,
            krigeweight::kriging::VarianceScheme::Simulated,
        ],
        prediction_points: 25,
        master_seed: STUDY_SEED,
        ..Default::default()
    };
    let r = run_study(&cfg).unwrap();
    let ratio = |scheme: &str| r.values(1, "a", "CL", scheme, "variance_ratio");
    let (s, sc, sim) = (ratio("sample"), ratio("scaled"), ratio("simulated"));
    let (ms, msc, msim) = (mean(&s), mean(&sc), mean(&sim));
    let complete = [&s, &sc, &sim].iter().all(|v| v.len() == REPLICATES);
    let pass = complete && (1.05..=1.30).contains(&ms) && (0.95..=1.08).contains(&msc) && (0.90..=1.10).contains(&msim);
    Outcome {
        pass,
        detail: format!(
            "mean ratio uncorrected {ms:.3} in [1.05, 1.30], scaled {msc:.3} in [0.95, 1.08], simulated {msim:.3} in [0.90, 1.10]"
        ),
    }
}

fn uniformity_p(points: &[Location], k: usize) -> f64 {
    let mut counts = vec![0usize; k * k];
    for p in points {
        let ix = ((p.x * k as f64) as usize).min(k - 1);
        let iy = ((p.y * k as f64) as usize).min(k - 1);
        counts[iy * k + ix] += 1;
    }
    let e = points.len() as f64 / (k * k) as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((k * k - 1) as f64).unwrap().cdf(stat)
}

fn criterion_5() -> Outcome {
    let unit = Bounds::unit_square();
    // At λ = 500 the sampling noise of a correct estimator alone averages
    // about 0.048, so the bound would not separate right from wrong. At
    // λ = 1000 it averages about 0.033, while the curve for 0.8λ sits near 0.09.
    let lambda = 1000.0;
    let surface = IntensitySurface::from_fn(GridSpec::new(unit, 2, 2).unwrap(), |_| lambda).unwrap();
    let radii: Vec<f64> = (0..=50).map(|k| k as f64 * 0.001).collect();
    let (mut sup, mut sup_wrong) = (0.0, 0.0);
    for s in 0..50 {
        let pattern = simulate_inhomogeneous_poisson(&surface, derive_seed(104, &[s])).unwrap();
        let g = g_function(&pattern, &radii);
        let dev = |l: f64| g.iter().map(|(h, v)| (v - csr_g(*h, l)).abs()).fold(0.0, f64::max) / 50.0;
        sup += dev(lambda);
        sup_wrong += dev(0.8 * lambda);
    }

    let k = 40;
    let lattice: Vec<Location> = (0..k * k)
        .map(|i| Location::new(((i % k) as f64 + 0.5) / k as f64, ((i / k) as f64 + 0.5) / k as f64))
        .collect();
    let cfg = PseudoConfig::default();
    let flat = draw_pseudo_locations(&PointPattern::new(lattice, unit).unwrap(), None, 2000, &cfg, 105).unwrap();
    let p_flat = uniformity_p(flat.locations(), 4);

    // Thin uniform points with a smooth rate; dividing by the rate must undo it.
    let rate = |p: &Location| 0.35 + 0.25 * (std::f64::consts::PI * p.x).cos() * (std::f64::consts::PI * p.y).cos();
    let mut rng = rng_from_seed(106);
    let (mut kept, mut rates) = (Vec::new(), Vec::new());
    for _ in 0..8000 {
        let p = Location::new(rng.random(), rng.random());
        if rng.random::<f64>() < rate(&p) {
            rates.push(rate(&p));
            kept.push(p);
        }
    }
    let thinned = PointPattern::new(kept, unit).unwrap();
    let corrected = draw_pseudo_locations(&thinned, Some(&rates), 2000, &cfg, 107).unwrap();
    let raw = draw_pseudo_locations(&thinned, None, 2000, &cfg, 107).unwrap();
    let (p_corr, p_raw) = (uniformity_p(corrected.locations(), 4), uniformity_p(raw.locations(), 4));
    Outcome {
        pass: sup < 0.05 && p_flat > 0.01 && p_corr > 0.01 && p_raw < 1e-6,
        detail: format!(
            "G sup deviation {sup:.4} (limit 0.05, against 0.8λ {sup_wrong:.4}); chi-square p uniform {p_flat:.3}, corrected {p_corr:.3} (> 0.01), uncorrected {p_raw:.1e} (< 1e-6)"
        ),
    }
}

fn run_cli(args: &[&str]) -> i32 {
    krigeweight_cli::run(std::iter::once("krigeweight").chain(args.iter().copied()))
}

fn same_bytes(a: &Path, b: &Path) -> bool {
    ["results.csv", "summary.csv", "population.csv", "metadata.csv"]
        .iter()
        .all(|f| std::fs::read(a.join(f)).ok().is_some_and(|x| Some(x) == std::fs::read(b.join(f)).ok()))
}

fn criterion_6() -> Outcome {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let p = |name: &str| d.join(name).to_str().unwrap().to_string();

    // Determinism, including across worker counts.
    let cfg = "expected_population = 300\ngrid_nodes = 15\nreplicates = 2\nprediction_points = 5\nmaster_seed = 7\n";
    std::fs::write(d.join("s.cfg"), cfg).unwrap();
    std::fs::write(d.join("s2.cfg"), format!("{cfg}threads = 2\n")).unwrap();
    let codes = [
        run_cli(&["simulate-study", "--config", &p("s.cfg"), "--out", &p("run1"), "--no-timestamp"]),
        run_cli(&["simulate-study", "--config", &p("s.cfg"), "--out", &p("run2"), "--no-timestamp"]),
        run_cli(&["simulate-study", "--config", &p("s2.cfg"), "--out", &p("run3"), "--no-timestamp"]),
    ];
    let identical = codes == [0, 0, 0] && same_bytes(&d.join("run1"), &d.join("run2"));
    let thread_free = identical && {
        let strip = |dir: &str| -> Vec<String> {
            std::fs::read_to_string(d.join(dir).join("metadata.csv")).unwrap().lines().filter(|l| !l.starts_with("threads,")).map(String::from).collect()
        };
        ["results.csv", "summary.csv", "population.csv"]
            .iter()
            .all(|f| std::fs::read(d.join("run1").join(f)).unwrap() == std::fs::read(d.join("run3").join(f)).unwrap())
            && strip("run1") == strip("run3")
    };

    // Every schema round-trips through its reader.
    let mut rng = rng_from_seed(108);
    let data: Vec<DataRow> = (0..25)
        .map(|i| DataRow {
            id: format!("w{i}"),
            x: rng.random::<f64>() * 1e5,
            y: -rng.random::<f64>(),
            value: rng.random::<f64>() - 0.5,
            inclusion_prob: Some(rng.random_range(0.01..1.0)),
            stratum: Some(format!("county {}", i % 4)),
            covariate: Some(rng.random::<f64>() * 1e-9),
        })
        .collect();
    io::write_data(&d.join("data.csv"), &data).unwrap();
    let points: Vec<PointRow> = data.iter().map(|r| PointRow { id: r.id.clone(), x: r.x, y: r.y }).collect();
    io::write_points(&d.join("points.csv"), &points).unwrap();
    let params = vec![ParamsRow { scheme: "WCL2".into(), tau2: 1.0 / 3.0, sigma2: 2e-300, range: 1e8, objective: -0.1, converged: true, iterations: 400 }];
    io::write_params(&d.join("params.csv"), &params).unwrap();
    let preds: Vec<PredictionRow> = points
        .iter()
        .map(|q| PredictionRow { id: q.id.clone(), x: q.x, y: q.y, mean: q.x.sin(), variance: q.y.powi(2), scheme: "scaled".into(), effective_n: 25, seed: 9 })
        .collect();
    io::write_predictions(&d.join("pred.csv"), &preds).unwrap();
    let grid = GridSpec::new(Bounds::new(0.0, 3.0, -1.0, 1.0).unwrap(), 9, 4).unwrap();
    let surface = IntensitySurface::from_fn(grid, |q| (q.x - q.y).exp() / 7.0).unwrap();
    io::write_intensity(&d.join("grid.csv"), &surface).unwrap();
    let grid_back = io::read_intensity(&d.join("grid.csv")).unwrap();
    let results = read_results(&d.join("run1").join("results.csv")).unwrap();
    let rewritten = krigeweight_cli::study::write_study(
        &StudyResults { populations: vec![], rows: results.clone() },
        &[],
        &d.join("rewrite"),
        None,
    );
    let round_trip = io::read_data(&d.join("data.csv")).unwrap() == data
        && io::read_points(&d.join("points.csv")).unwrap() == points
        && io::read_params(&d.join("params.csv")).unwrap() == params
        && io::read_predictions(&d.join("pred.csv")).unwrap() == preds
        && grid_back.values() == surface.values()
        && grid_back.grid() == surface.grid()
        && rewritten.is_ok()
        && std::fs::read(d.join("rewrite").join("results.csv")).unwrap() == std::fs::read(d.join("run1").join("results.csv")).unwrap();

    // Ten malformed inputs, each exiting with code 2.
    let fixtures = [
        ("missing_column.csv", "id,x,value\na,0.1,1\n"),
        ("bad_number.csv", "id,x,y,value\na,0.1,0.2,1\nb,zero,0.2,1\n"),
        ("duplicate_id.csv", "id,x,y,value\na,0.1,0.2,1\na,0.3,0.2,1\n"),
        ("bad_prob.csv", "id,x,y,value,inclusion_prob\na,0.1,0.2,1,0\n"),
        ("header_only.csv", "id,x,y,value\n"),
        ("unknown_column.csv", "id,x,y,value,depth\na,0.1,0.2,1,3\n"),
        ("infinite.csv", "id,x,y,value\na,inf,0.2,1\n"),
        ("ragged.csv", "id,x,y,value\na,0.1,0.2\n"),
        ("blank_id.csv", "id,x,y,value\n,0.1,0.2,1\n"),
    ];
    let mut codes = Vec::new();
    for (name, text) in fixtures {
        std::fs::write(d.join(name), text).unwrap();
        codes.push(run_cli(&["fit", "--data", &p(name), "--out", &p("never.csv")]));
    }
    std::fs::write(d.join("bad.cfg"), "replicates = 0\n").unwrap();
    codes.push(run_cli(&["simulate-study", "--config", &p("bad.cfg"), "--no-timestamp"]));
    let exit_ok = codes.iter().all(|&c| c == 2) && !d.join("never.csv").exists();

    Outcome {
        pass: identical && thread_free && round_trip && exit_ok,
        detail: format!(
            "byte-identical reruns {}, independent of worker count {}, six schemas round-trip {}, exit codes {codes:?}",
            verdict(identical),
            verdict(thread_free),
            verdict(round_trip)
        ),
    }
}

#[test]
fn acceptance() {
    let results = [
        report(1, "kriging oracle", Duration::from_secs(10), criterion_1),
        report(2, "objective", Duration::from_secs(5), criterion_2),
        report(3, "estimator calibration", Duration::from_secs(15 * 60), criterion_3),
        report(4, "variance-ratio correction", Duration::from_secs(10 * 60), criterion_4),
        report(5, "point process", Duration::from_secs(2 * 60), criterion_5),
        report(6, "determinism and interface", Duration::from_secs(5 * 60), criterion_6),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(k, _)| k + 1).collect();
    println!("acceptance: {} of 6 criteria pass, failing {failed:?}", 6 - failed.len());
    // Verdicts are reported by default; ACCEPTANCE_STRICT=1 turns a FAIL into a test failure.
    if std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        assert!(failed.is_empty(), "failing criteria: {failed:?}");
    }
}
