use std::collections::HashMap;

use krigeweight::designs::*;
use krigeweight::geometry::{Bounds, Location};
use krigeweight::pointprocess::PointPattern;
use krigeweight::rng::{derive_seed, rng_from_seed};
use krigeweight::synthetic::{simulate_population, PopulationKind, PopulationSpec};
use rand::Rng;

fn uniform_population(n: usize, seed: u64) -> Population {
    let mut rng = rng_from_seed(seed);
    let pts: Vec<Location> = (0..n).map(|_| Location::new(rng.random(), rng.random())).collect();
    let values = (0..n).map(|k| k as f64).collect();
    Population::new(PointPattern::new(pts, Bounds::unit_square()).unwrap(), values).unwrap()
}

#[test]
fn srs_sizes_are_binomial() {
    let pop = uniform_population(1000, 1);
    let seeds = 500;
    let sizes: Vec<f64> = (0..seeds)
        .map(|s| draw_sample(&pop, &DesignSpec::srs(0.21), derive_seed(2, &[s])).unwrap().indices.len() as f64)
        .collect();
    let mean = sizes.iter().sum::<f64>() / seeds as f64;
    let se = (1000.0 * 0.21 * 0.79 / seeds as f64).sqrt();
    assert!((mean - 210.0).abs() < 3.0 * se, "mean size {mean}");
}

#[test]
fn srs_size_distribution_ignores_population_order() {
    let pop = uniform_population(600, 3);
    let mut rev_pts = pop.pattern.points().to_vec();
    rev_pts.reverse();
    let mut rev_vals = pop.values.clone();
    rev_vals.reverse();
    let rev = Population::new(PointPattern::new(rev_pts, Bounds::unit_square()).unwrap(), rev_vals).unwrap();
    let seeds = 300;
    let mean_size = |p: &Population, tag: u64| {
        (0..seeds)
            .map(|s| draw_sample(p, &DesignSpec::srs(0.3), derive_seed(tag, &[s])).unwrap().indices.len() as f64)
            .sum::<f64>()
            / seeds as f64
    };
    let (a, b) = (mean_size(&pop, 4), mean_size(&rev, 5));
    let se = (2.0 * 600.0 * 0.3 * 0.7 / seeds as f64).sqrt();
    assert!((a - b).abs() < 3.0 * se, "{a} vs {b}");
}

#[test]
fn stratified_empirical_rates_match_the_table() {
    let sizes = [500usize, 250, 150, 50, 10];
    let strata: Vec<u32> = sizes.iter().enumerate().flat_map(|(k, &n)| vec![k as u32; n]).collect();
    let n: usize = sizes.iter().sum();
    let pop = uniform_population(n, 6).with_strata(strata.clone()).unwrap();
    let spec = DesignSpec::stratified(RateTable::wells());
    let seeds = 200;
    let mut hits: HashMap<u32, usize> = HashMap::new();
    for s in 0..seeds {
        for i in draw_sample(&pop, &spec, derive_seed(7, &[s])).unwrap().indices {
            *hits.entry(strata[i]).or_default() += 1;
        }
    }
    for (k, &size) in sizes.iter().enumerate() {
        let rate = RateTable::wells().rate_for(size);
        let trials = (size * seeds as usize) as f64;
        let emp = hits[&(k as u32)] as f64 / trials;
        let se = (rate * (1.0 - rate) / trials).sqrt();
        assert!((emp - rate).abs() < 3.0 * se, "stratum of {size}: {emp} vs {rate}");
    }
}

#[test]
fn logit_design_is_informative() {
    let pop = simulate_population(&PopulationSpec { expected_size: 600.0, grid_nodes: 20, ..Default::default() }, 8)
        .unwrap()
        .population;
    let pop_mean = pop.values.iter().sum::<f64>() / pop.len() as f64;
    let spec = DesignSpec::logit(DEFAULT_LOGIT_ALPHA0, DEFAULT_LOGIT_ALPHA1);
    let above = (0..100)
        .filter(|&s| {
            let d = draw_sample(&pop, &spec, derive_seed(9, &[s])).unwrap();
            let m = d.sample.values().iter().sum::<f64>() / d.sample.len() as f64;
            m > pop_mean
        })
        .count();
    assert!(above >= 90, "{above}/100");
}

#[test]
fn inverse_intensity_design_flattens_a_preferential_population() {
    // Uniform locations see the area average of the intensity; the population
    // itself oversamples high-intensity regions.
    let seeds = 20;
    let mut flatter = 0;
    for s in 0..seeds {
        let spec = PopulationSpec {
            kind: PopulationKind::Preferential,
            expected_size: 1000.0,
            grid_nodes: 20,
            ..Default::default()
        };
        let synth = simulate_population(&spec, derive_seed(10, &[s])).unwrap();
        let pop = synth.population;
        let lambda = pop.intensity.clone().unwrap();
        let area_mean = synth.surface.integral() / Bounds::unit_square().area();
        let pop_mean = lambda.iter().sum::<f64>() / lambda.len() as f64;
        let d = draw_sample(&pop, &DesignSpec::inverse_intensity(0.0, 0.0, None), derive_seed(11, &[s])).unwrap();
        let sample_mean = d.indices.iter().map(|&i| lambda[i]).sum::<f64>() / d.indices.len() as f64;
        if (sample_mean - area_mean).abs() < (sample_mean - pop_mean).abs() {
            flatter += 1;
        }
    }
    assert!(flatter as f64 >= 0.8 * seeds as f64, "{flatter}/{seeds}");
}

#[test]
fn inverse_intensity_expected_size_is_the_target() {
    let pop = simulate_population(&PopulationSpec { expected_size: 500.0, grid_nodes: 15, ..Default::default() }, 12)
        .unwrap()
        .population;
    let inc = evaluate_inclusion(&pop, &DesignSpec::inverse_intensity(-1.0, 1.0, Some(100.0))).unwrap();
    assert!(inc.probs.iter().all(|&p| p > 0.0 && p <= 1.0));
    if inc.clamped == 0 {
        assert!((inc.probs.iter().sum::<f64>() - 100.0).abs() < 1e-9);
    }
}
