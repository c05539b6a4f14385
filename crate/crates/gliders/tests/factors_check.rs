//! Factor maps must commute with the dynamics exactly, and the lifted
//! entry-time machinery must agree with stepping the source automaton and
//! projecting afterwards.

use gliders::ca::ConfigurationWindow;
use gliders::entrytime::{entry_time, required_walk_range, Side};
use gliders::factors::{
    builtin_factor, commutation_check, defect_projection, exhaustive_commutation_check,
    lifted_entry_time_by_simulation, diagnose_projected,
};
use gliders::measures::{sample_window, MixVerdict, SamplerSpec};
use gliders::rng::trial_rng;
use gliders::walks::partial_sums;
use rand::Rng;

#[test]
fn builtin_commutation_exhaustive() {
    for (name, width) in [
        ("traffic", 10),
        ("cyclic3", 8),
        ("product", 10),
        ("captive_identity", 10),
        ("captive_shift", 10),
    ] {
        let factor = builtin_factor(name).unwrap();
        let report = exhaustive_commutation_check(&factor, width).unwrap();
        assert!(
            report.passed(),
            "{name}: commutation broke on {:?}",
            report.counterexample
        );
        let states = factor.source().alphabet_size() as u64;
        assert_eq!(report.checked, states.pow(width as u32));
    }
}

#[test]
fn builtin_commutation_random_wide() {
    for name in ["traffic", "cyclic3", "product", "captive_identity", "captive_shift"] {
        let factor = builtin_factor(name).unwrap();
        let report = commutation_check(&factor, 500, 1000, name_seed(name)).unwrap();
        assert!(
            report.passed(),
            "{name}: commutation broke on {:?}",
            report.counterexample
        );
        assert_eq!(report.checked, 1000);
    }
}

fn name_seed(name: &str) -> u64 {
    name.bytes().fold(0u64, |h, b| h.wrapping_mul(31).wrapping_add(b as u64))
}

/// Walk-based lifted entry times against stepping the source automaton and
/// projecting each generation.
fn check_lifted(name: &str, sampler: &SamplerSpec, n: u64, horizon: u64, trials: u64) {
    let factor = builtin_factor(name).unwrap();
    let rule = factor.target();
    let order = factor.sft().order() as i64;
    let r = factor.source().radius().max(rule.radius()) as i64;
    let m = (n + horizon) as i64;
    let width = -rule.v_minus();
    let (walk_lo, walk_hi) = required_walk_range(rule, n, horizon, Side::Minus);
    let lo = (-r * m).min(walk_lo).min(0) - 2;
    let hi = (width - 1 + r * m).max(walk_hi) + order + 2;
    for trial in 0..trials {
        let source = sample_window(sampler, lo, hi, trial).unwrap();
        let projected = defect_projection(&source, factor.sft()).unwrap();
        let walk = partial_sums(&projected).unwrap();
        let fast = entry_time(&walk, rule, n, horizon, Side::Minus).unwrap();
        let slow = lifted_entry_time_by_simulation(&factor, &source, n, horizon, Side::Minus).unwrap();
        assert_eq!(
            fast.time, slow.time,
            "{name} trial {trial}: projected walk gives {:?}, source stepping gives {:?}",
            fast.time, slow.time,
        );
    }
}

#[test]
fn lifted_entry_times_match_source_stepping() {
    let coin = SamplerSpec::bernoulli(21, vec![0.5, 0.5]).unwrap();
    check_lifted("traffic", &coin, 30, 60, 300);
    let uniform = SamplerSpec::bernoulli(22, vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
    check_lifted("cyclic3", &uniform, 30, 60, 300);
    let coin2 = SamplerSpec::bernoulli(23, vec![0.5, 0.5]).unwrap();
    check_lifted("product", &coin2, 30, 60, 300);
}

/// In the product automaton the defects are block boundaries, so the
/// projected symbols must strictly alternate +1 / -1 along any window.
#[test]
fn product_projection_alternates() {
    let factor = builtin_factor("product").unwrap();
    for trial in 0..200u64 {
        let mut rng = trial_rng(31, trial);
        let cells: Vec<u8> = (0..300).map(|_| rng.gen_range(0..2u8)).collect();
        let window = ConfigurationWindow::new(-150, cells, 2).unwrap();
        let projected = defect_projection(&window, factor.sft()).unwrap();
        let mut last = 0i8;
        for j in projected.lo()..=projected.hi() {
            let s = projected.signed(j).unwrap();
            if s != 0 {
                assert_ne!(s, last, "trial {trial}: double {s} defect at {j}");
                last = s;
            }
        }
    }
}

/// One-sided captive projections carry defects of only one sign, so their
/// projected measure cannot pass the balanced-mean/positive-variance gate.
#[test]
fn captive_projections_fail_membership() {
    let uniform = SamplerSpec::bernoulli(41, vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
    for name in ["captive_identity", "captive_shift"] {
        let factor = builtin_factor(name).unwrap();
        let d = diagnose_projected(&factor, &uniform, 20000, 50).unwrap();
        assert!(
            matches!(d.verdict, MixVerdict::MeanNonzero | MixVerdict::VarianceZero),
            "{name}: expected a membership failure, got {:?}",
            d
        );
    }
}
