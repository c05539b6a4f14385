//! Distributional checks: sampler stationarity, the Brownian-minimum law,
//! scale invariance of the minima comparison, and scheduling-independence
//! of the Monte Carlo merges. All thresholds sit at the 0.001 significance
//! level and every stream is seeded, so a pass is reproducible.

use gliders::ca::GlidersRule;
use gliders::entrytime::{run_cdf_experiment, Side};
use gliders::measures::{sample_window, SamplerSpec};
use gliders::oracle::{
    brownian_min_cdf, simulate_minima_comparison, IncrementDist, MinimaComparisonParams,
};
use gliders::rng::trial_rng;
use rand::Rng;

/// chi^2 statistic for observed counts against expected probabilities.
fn chi_squared(observed: &[u64], probabilities: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    observed
        .iter()
        .zip(probabilities)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

// 0.001 quantiles of chi^2 with 2 and 8 degrees of freedom.
const CHI2_DF2: f64 = 13.816;
const CHI2_DF8: f64 = 26.124;

#[test]
fn markov_first_cell_is_stationary() {
    // Doubly stochastic and irreducible, so the stationary vector is
    // uniform without trusting the sampler's own fixed-point solve.
    let transition = vec![
        vec![0.5, 0.3, 0.2],
        vec![0.2, 0.5, 0.3],
        vec![0.3, 0.2, 0.5],
    ];
    let spec = SamplerSpec::markov(51, transition).unwrap();
    let mut counts = [0u64; 3];
    for trial in 0..3000u64 {
        let w = sample_window(&spec, 0, 0, trial).unwrap();
        counts[w.cells()[0] as usize] += 1;
    }
    let stat = chi_squared(&counts, &[1.0 / 3.0; 3]);
    assert!(stat < CHI2_DF2, "chi^2 {stat} for counts {counts:?}");
}

#[test]
fn markov_pairs_follow_the_transition_matrix() {
    let transition = vec![
        vec![0.5, 0.3, 0.2],
        vec![0.2, 0.5, 0.3],
        vec![0.3, 0.2, 0.5],
    ];
    let spec = SamplerSpec::markov(52, transition.clone()).unwrap();
    let mut counts = [0u64; 9];
    for trial in 0..5000u64 {
        let w = sample_window(&spec, -1, 0, trial).unwrap();
        let (a, b) = (w.cells()[0] as usize, w.cells()[1] as usize);
        counts[3 * a + b] += 1;
    }
    // stationary is uniform, so pair (a, b) has probability P[a][b] / 3
    let probs: Vec<f64> = transition.iter().flatten().map(|p| p / 3.0).collect();
    let stat = chi_squared(&counts, &probs);
    assert!(stat < CHI2_DF8, "chi^2 {stat} for counts {counts:?}");
}

#[test]
fn balanced_bernoulli_charge_is_centered() {
    let p = 0.25;
    let len = 10_000i64;
    let spec = SamplerSpec::bernoulli_signed(53, p, 1.0 - 2.0 * p, p).unwrap();
    let bound = 4.0 * (2.0 * p * len as f64).sqrt();
    for trial in 0..5u64 {
        let w = sample_window(&spec, 0, len - 1, trial).unwrap();
        let charge: i64 = w.signed_cells().unwrap().iter().map(|&v| v as i64).sum();
        assert!(
            (charge as f64).abs() <= bound,
            "trial {trial}: charge {charge} exceeds {bound}"
        );
    }
}

#[test]
fn dirac_uniform_phase_is_uniform() {
    let spec = SamplerSpec::dirac_periodic_signed(54, &[1, -1, 0], true).unwrap();
    let mut counts = [0u64; 3];
    for trial in 0..3000u64 {
        let w = sample_window(&spec, 0, 0, trial).unwrap();
        counts[w.cells()[0] as usize] += 1;
    }
    let stat = chi_squared(&counts, &[1.0 / 3.0; 3]);
    assert!(stat < CHI2_DF2, "chi^2 {stat} for counts {counts:?}");
}

/// Rescaled minima of a fair +-1 walk against the reflection-principle law
/// 2 Phi(m) of the Brownian minimum on [0, 1].
#[test]
fn walk_minima_match_the_brownian_law() {
    let steps = 10_000u64;
    let trials = 20_000u64;
    let scale = (steps as f64).sqrt();
    // bin edges in units of the rescaled minimum
    let edges = [-2.5, -2.0, -1.5, -1.0, -0.75, -0.5, -0.25, -0.1, 0.0];
    let mut counts = vec![0u64; edges.len() + 1];
    for trial in 0..trials {
        let mut rng = trial_rng(55, trial);
        let mut pos = 0i64;
        let mut min = 0i64;
        for _ in 0..steps {
            pos += if rng.gen::<bool>() { 1 } else { -1 };
            min = min.min(pos);
        }
        let m = min as f64 / scale;
        let bin = edges.iter().position(|&e| m < e).unwrap_or(edges.len());
        counts[bin] += 1;
    }
    let mut probs = Vec::with_capacity(counts.len());
    let mut last = 0.0;
    for &e in &edges {
        let c = brownian_min_cdf(e).unwrap();
        probs.push(c - last);
        last = c;
    }
    probs.push(1.0 - last);
    let stat = chi_squared(&counts, &probs);
    // 0.001 quantile of chi^2 with 9 degrees of freedom
    assert!(stat < 27.877, "chi^2 {stat} for counts {counts:?}");
}

/// The comparison probability depends only on the ratio of the arm
/// durations, so scaling both by c must not move the estimate.
#[test]
fn minima_comparison_is_scale_invariant() {
    let trials = 20_000u64;
    let steps = 8000u64;
    let mut estimates = Vec::new();
    for (i, c) in [1.0, 0.5, 2.0].into_iter().enumerate() {
        let params = MinimaComparisonParams::new(c * 1.0, c * 2.0, 0.0).unwrap();
        let est =
            simulate_minima_comparison(&params, steps, trials, 60 + i as u64, IncrementDist::FairSign)
                .unwrap();
        assert!(
            (est.empirical - est.closed_form).abs() < 0.02,
            "scale {c}: {} vs {}",
            est.empirical,
            est.closed_form
        );
        estimates.push(est.empirical);
    }
    for e in &estimates[1..] {
        assert!((e - estimates[0]).abs() < 0.02);
    }
}

/// Fair-sign and three-point increments must land on the same limit.
#[test]
fn minima_comparison_ignores_the_increment_law() {
    let params = MinimaComparisonParams::new(1.0, 3.0, 0.0).unwrap();
    let fair =
        simulate_minima_comparison(&params, 2000, 20_000, 61, IncrementDist::FairSign).unwrap();
    let three = simulate_minima_comparison(
        &params,
        2000,
        20_000,
        61,
        IncrementDist::ThreePoint { p: 0.25 },
    )
    .unwrap();
    assert!((fair.empirical - 1.0 / 3.0).abs() < 0.02, "{}", fair.empirical);
    assert!((three.empirical - 1.0 / 3.0).abs() < 0.02, "{}", three.empirical);
    assert!((fair.empirical - three.empirical).abs() < 0.02);
}

/// The trial merge is a sum of counts, so the result cannot depend on how
/// rayon slices the work.
#[test]
fn experiment_is_thread_count_independent() {
    let sampler = SamplerSpec::bernoulli_signed(62, 0.5, 0.0, 0.5).unwrap();
    let rule = GlidersRule::new(-1, 1).unwrap();
    let xs = [0.5, 1.0, 2.0];
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_cdf_experiment(&sampler, rule, 50, &xs, 400, Side::Minus).unwrap())
    };
    let one = run(1);
    let seven = run(7);
    assert_eq!(one.estimates, seven.estimates);
    assert_eq!(one.to_csv(), seven.to_csv());
}
