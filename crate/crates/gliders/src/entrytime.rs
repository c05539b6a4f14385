//! Particle entry times and their limit statistics.
//!
//! Fix a `(v-, v+)` rule and watch the window `[0, |v-| - 1]` (or
//! `[0, v+ - 1]` on the plus side) from time `n` onward: the entry time is
//! the first extra step `k` at which a particle of the watched species shows
//! up, i.e. `T = min { k >= 0 : F^{n+k}(a) puts the species in the window }`.
//! Via the walk representation this is a scan over strict-minimum events,
//! so a trial costs one walk build plus `O(horizon)` range-minimum queries
//! instead of `O(horizon^2)` cellular steps.
//!
//! As `n` grows, `T/n` converges in law to an explicit (sub-)distribution;
//! [`theoretical_cdf`] evaluates it and [`run_cdf_experiment`] estimates it
//! by deterministic parallel Monte Carlo.

use crate::ca::{step, ConfigurationWindow, GlidersRule, SIGNED_ALPHABET};
use crate::error::{Error, Result};
use crate::measures::{sample_window, SamplerSpec};
use crate::report::fmt_sig6;
use crate::walks::{partial_sums, WalkPath};
use rayon::prelude::*;
use std::f64::consts::FRAC_2_PI;

/// Which particle species, and hence which window, to watch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// -1 particles entering `[0, |v-| - 1]`.
    Minus,
    /// +1 particles entering `[0, v+ - 1]`; requires `v+ > 0`.
    Plus,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        })
    }
}

/// Outcome of one entry-time evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EntryTimeResult {
    /// First `k <= horizon` with the species in the window, or `None` if
    /// the scan exhausted the horizon.
    pub time: Option<u64>,
    pub horizon: u64,
    pub n: u64,
    pub side: Side,
}

fn require_plus_side(rule: GlidersRule) -> Result<()> {
    if rule.v_plus() == 0 {
        return Err(Error::arg(
            "plus side requires v_plus > 0 (the +1 window would be empty)",
        ));
    }
    Ok(())
}

/// Walk range needed to evaluate all entry queries up to the horizon.
///
/// Returned as `(lo, hi)` in walk coordinates.
pub fn required_walk_range(rule: GlidersRule, n: u64, horizon: u64, side: Side) -> (i64, i64) {
    let m = (n + horizon) as i64;
    let width = match side {
        Side::Minus => -rule.v_minus(),
        Side::Plus => rule.v_plus(),
    };
    (-rule.v_plus() * m, -rule.v_minus() * m + width)
}

/// Minus-side scan; the walk must already cover the required range.
fn entry_time_minus_scan(
    walk: &WalkPath,
    rule: GlidersRule,
    n: u64,
    horizon: u64,
) -> Option<u64> {
    let v_minus = rule.v_minus();
    let v_plus = rule.v_plus();
    let width = -v_minus;
    for k in 0..=horizon {
        let m = (n + k) as i64;
        for i in 0..width {
            let left = i - v_plus * m;
            let right = i - v_minus * m;
            if walk.value(right + 1) < walk.min_in(left, right) {
                return Some(k);
            }
        }
    }
    None
}

/// First `k <= horizon` such that the watched species occupies its window
/// at time `n + k`, computed from the partial-sum walk.
pub fn entry_time(
    walk: &WalkPath,
    rule: GlidersRule,
    n: u64,
    horizon: u64,
    side: Side,
) -> Result<EntryTimeResult> {
    let (need_lo, need_hi) = required_walk_range(rule, n, horizon, side);
    walk.require_range(need_lo.min(0), need_hi)?;
    let time = match side {
        Side::Minus => entry_time_minus_scan(walk, rule, n, horizon),
        Side::Plus => {
            require_plus_side(rule)?;
            // swap species: reflect the walk around v+ and watch the minus
            // side of the mirrored rule
            let mirrored = walk.mirrored(rule.v_plus())?;
            entry_time_minus_scan(&mirrored, rule.mirrored()?, n, horizon)
        }
    };
    Ok(EntryTimeResult {
        time,
        horizon,
        n,
        side,
    })
}

/// Reference implementation: step the automaton and look at the window.
///
/// The configuration must contain the full dependence cone
/// `[-r * (n + horizon), width - 1 + r * (n + horizon)]`. Quadratic in the
/// horizon, so only suitable for modest parameters; used to validate
/// [`entry_time`].
pub fn entry_time_by_simulation(
    config: &ConfigurationWindow,
    rule: GlidersRule,
    n: u64,
    horizon: u64,
    side: Side,
) -> Result<EntryTimeResult> {
    if side == Side::Plus {
        require_plus_side(rule)?;
    }
    let (width, wanted) = match side {
        Side::Minus => (-rule.v_minus(), 0u8), // encoded -1
        Side::Plus => (rule.v_plus(), 2u8),    // encoded +1
    };
    let r = rule.radius() as i64;
    let m = (n + horizon) as i64;
    if config.lo() > -r * m || config.hi() < width - 1 + r * m {
        return Err(Error::WindowTooShort {
            need: (2 * r * m + width) as usize,
            got: config.len(),
        });
    }
    let local = rule.local();
    let mut current = config.clone();
    let mut time = None;
    for t in 0..=(n + horizon) {
        if t >= n {
            let hit = (0..width).any(|i| current.get(i) == Some(wanted));
            if hit {
                time = Some(t - n);
                break;
            }
        }
        if t < n + horizon {
            current = step(&current, &local)?;
        }
    }
    Ok(EntryTimeResult {
        time,
        horizon,
        n,
        side,
    })
}

/// Limiting law of `T/n`.
///
/// On the minus side this is
/// `(2/pi) * atan(sqrt(-v- * x / (v+ - v- + v+ * x)))`, and the plus side is
/// the same formula for the species-swapped rule. The limit is defective
/// unless `v+ = 0` (minus side): as `x -> inf` the mass tends to
/// `(2/pi) * atan(sqrt(|v-| / v+))`, the rest escaping to infinity.
pub fn theoretical_cdf(rule: GlidersRule, x: f64, side: Side) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::arg(format!("cdf argument must be finite and >= 0 (got {x})")));
    }
    let (v_minus, v_plus) = match side {
        Side::Minus => (rule.v_minus() as f64, rule.v_plus() as f64),
        Side::Plus => {
            require_plus_side(rule)?;
            // mirrored speeds
            (-(rule.v_plus()) as f64, -(rule.v_minus()) as f64)
        }
    };
    let numerator = -v_minus * x;
    let denominator = v_plus - v_minus + v_plus * x;
    Ok(FRAC_2_PI * (numerator / denominator).sqrt().atan())
}

/// Empirical CDF of `T/n` on a grid, with binomial standard errors.
#[derive(Clone, Debug)]
pub struct EmpiricalCdf {
    pub xs: Vec<f64>,
    pub estimates: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub theoretical: Vec<f64>,
    pub trials: u64,
    pub n: u64,
    pub rule: GlidersRule,
    pub side: Side,
    pub sampler_digest: String,
    /// Set when the trials went through a factor map of a larger automaton.
    pub factor_name: Option<String>,
}

impl EmpiricalCdf {
    /// Render as CSV; a `factor_name` column is appended for lifted runs.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("x,empirical,theoretical,stderr,trials,n,v_minus,v_plus,side,sampler_digest");
        if self.factor_name.is_some() {
            out.push_str(",factor_name");
        }
        out.push('\n');
        for (i, &x) in self.xs.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}",
                fmt_sig6(x),
                fmt_sig6(self.estimates[i]),
                fmt_sig6(self.theoretical[i]),
                fmt_sig6(self.standard_errors[i]),
                self.trials,
                self.n,
                self.rule.v_minus(),
                self.rule.v_plus(),
                self.side,
                self.sampler_digest,
            ));
            if let Some(name) = &self.factor_name {
                out.push(',');
                out.push_str(name);
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn validate_grid(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::arg("need at least one grid point"));
    }
    for &x in xs {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::arg(format!(
                "grid points must be finite and >= 0 (got {x})"
            )));
        }
    }
    Ok(xs.iter().cloned().fold(0.0, f64::max))
}

pub(crate) fn horizon_for(n: u64, max_x: f64) -> u64 {
    (n as f64 * max_x).ceil() as u64
}

/// Count, per grid point, how often `T/n <= x` across trials.
///
/// Trials are independent streams keyed by `(sampler seed, trial id)` and
/// merged by summation, so the result does not depend on the number of
/// worker threads. Entry times beyond the horizon `ceil(n * max x)` count
/// for no grid point, which is exact for every `x` in the grid.
pub fn run_cdf_experiment(
    sampler: &SamplerSpec,
    rule: GlidersRule,
    n: u64,
    xs: &[f64],
    trials: u64,
    side: Side,
) -> Result<EmpiricalCdf> {
    if sampler.alphabet_size() != SIGNED_ALPHABET {
        return Err(Error::AlphabetMismatch {
            rule_alphabet: SIGNED_ALPHABET,
            window_alphabet: sampler.alphabet_size(),
        });
    }
    if n == 0 {
        return Err(Error::arg("n must be positive"));
    }
    if trials == 0 {
        return Err(Error::arg("need at least one trial"));
    }
    if side == Side::Plus {
        require_plus_side(rule)?;
    }
    let max_x = validate_grid(xs)?;
    let horizon = horizon_for(n, max_x);
    let (walk_lo, walk_hi) = required_walk_range(rule, n, horizon, side);
    let (cell_lo, cell_hi) = (walk_lo.min(0), walk_hi - 1);

    let thresholds: Vec<f64> = xs.iter().map(|&x| x * n as f64).collect();
    let counts = (0..trials)
        .into_par_iter()
        .try_fold(
            || vec![0u64; xs.len()],
            |mut acc, trial| -> Result<Vec<u64>> {
                let window = sample_window(sampler, cell_lo, cell_hi, trial)?;
                let walk = partial_sums(&window)?;
                let result = entry_time(&walk, rule, n, horizon, side)?;
                if let Some(t) = result.time {
                    let t = t as f64;
                    for (slot, &cut) in acc.iter_mut().zip(&thresholds) {
                        if t <= cut {
                            *slot += 1;
                        }
                    }
                }
                Ok(acc)
            },
        )
        .try_reduce(
            || vec![0u64; xs.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;

    let estimates: Vec<f64> = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    let standard_errors: Vec<f64> = estimates
        .iter()
        .map(|&p| (p * (1.0 - p) / trials as f64).sqrt())
        .collect();
    let theoretical = xs
        .iter()
        .map(|&x| theoretical_cdf(rule, x, side))
        .collect::<Result<Vec<f64>>>()?;
    Ok(EmpiricalCdf {
        xs: xs.to_vec(),
        estimates,
        standard_errors,
        theoretical,
        trials,
        n,
        rule,
        side,
        sampler_digest: sampler.digest(),
        factor_name: None,
    })
}

/// Result of the drift asymmetry check.
#[derive(Clone, Debug)]
pub struct BirkhoffAsymmetry {
    /// Fraction of trials whose plus-side entry exceeded the horizon.
    pub plus_exceeding: f64,
    /// Fraction of trials whose minus-side entry was at most `n * x`.
    pub minus_within: f64,
    pub trials: u64,
    pub horizon: u64,
}

/// Under a measure that favours -1 over +1 the walk drifts downward, so
/// minus-side entries happen fast while plus-side entries stall: Birkhoff
/// averages push every left-arm minimum below the right arm eventually.
/// Requires a strictly negative signed mean and `v+ > 0`.
pub fn birkhoff_asymmetry_check(
    sampler: &SamplerSpec,
    rule: GlidersRule,
    n: u64,
    x: f64,
    trials: u64,
) -> Result<BirkhoffAsymmetry> {
    require_plus_side(rule)?;
    if n == 0 || trials == 0 {
        return Err(Error::arg("n and trials must be positive"));
    }
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::arg("x must be finite and positive"));
    }
    let mean = sampler.signed_mean()?;
    if mean >= 0.0 {
        return Err(Error::arg(format!(
            "drift check needs more mass on -1 than on +1 (signed mean {mean})"
        )));
    }
    let horizon = horizon_for(n, x);
    // one window serves both sides
    let (minus_lo, minus_hi) = required_walk_range(rule, n, horizon, Side::Minus);
    let (plus_lo, plus_hi) = required_walk_range(rule, n, horizon, Side::Plus);
    let (cell_lo, cell_hi) = (minus_lo.min(plus_lo).min(0), minus_hi.max(plus_hi) - 1);
    let threshold = x * n as f64;

    let totals = (0..trials)
        .into_par_iter()
        .try_fold(
            || [0u64; 2],
            |mut acc, trial| -> Result<[u64; 2]> {
                let window = sample_window(sampler, cell_lo, cell_hi, trial)?;
                let walk = partial_sums(&window)?;
                let plus = entry_time(&walk, rule, n, horizon, Side::Plus)?;
                let minus = entry_time(&walk, rule, n, horizon, Side::Minus)?;
                if plus.time.is_none() {
                    acc[0] += 1;
                }
                if matches!(minus.time, Some(t) if (t as f64) <= threshold) {
                    acc[1] += 1;
                }
                Ok(acc)
            },
        )
        .try_reduce(|| [0u64; 2], |a, b| Ok([a[0] + b[0], a[1] + b[1]]))?;

    Ok(BirkhoffAsymmetry {
        plus_exceeding: totals[0] as f64 / trials as f64,
        minus_within: totals[1] as f64 / trials as f64,
        trials,
        horizon,
    })
}
