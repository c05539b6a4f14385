//! Random-walk minima oracle.
//!
//! The entry-time limit laws reduce to one continuum fact: for independent
//! Brownian arms of durations `y` and `z`, the left minimum lies strictly
//! below the right one with probability `(2/pi) * atan(sqrt(y / z))`. This
//! module evaluates that closed form and estimates the same quantity by
//! direct simulation of discrete walks, so the statistical machinery can be
//! validated against a target that has nothing to do with cellular automata.

use crate::error::{Error, Result};
use crate::report::fmt_sig6;
use crate::rng::trial_rng;
use rand::RngCore;
use rayon::prelude::*;
use std::f64::consts::FRAC_2_PI;

/// Arm durations and comparison offset for a minima comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimaComparisonParams {
    y: f64,
    z: f64,
    epsilon: f64,
}

impl MinimaComparisonParams {
    pub fn new(y: f64, z: f64, epsilon: f64) -> Result<MinimaComparisonParams> {
        if !(y.is_finite() && y > 0.0 && z.is_finite() && z > 0.0) {
            return Err(Error::arg(format!(
                "arm durations must be positive and finite (got y = {y}, z = {z})"
            )));
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::arg(format!(
                "offset epsilon must be >= 0 and finite (got {epsilon})"
            )));
        }
        Ok(MinimaComparisonParams { y, z, epsilon })
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// `P(min of the y-arm < min of the z-arm)` for Brownian arms:
/// `(2/pi) * atan(sqrt(y / z))`.
///
/// Only the offset-free case has a closed form; for `epsilon > 0` use
/// [`simulate_minima_comparison`].
pub fn minima_comparison_probability(params: &MinimaComparisonParams) -> Result<f64> {
    if params.epsilon != 0.0 {
        return Err(Error::arg(
            "closed form requires epsilon = 0; use simulation for offset comparisons",
        ));
    }
    Ok(FRAC_2_PI * (params.y / params.z).sqrt().atan())
}

/// Step distribution of the simulated walks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IncrementDist {
    /// +1 or -1, each with probability 1/2.
    FairSign,
    /// -1, 0, +1 with probabilities (p, 1 - 2p, p).
    ThreePoint { p: f64 },
}

impl IncrementDist {
    fn validate(&self) -> Result<()> {
        if let IncrementDist::ThreePoint { p } = self {
            if !p.is_finite() || *p <= 0.0 || *p > 0.5 {
                return Err(Error::arg(format!(
                    "three-point weight must lie in (0, 0.5] (got {p}); \
                     p = 0 gives a frozen walk"
                )));
            }
        }
        Ok(())
    }

    /// Variance of a single step.
    pub fn variance(&self) -> f64 {
        match self {
            IncrementDist::FairSign => 1.0,
            IncrementDist::ThreePoint { p } => 2.0 * p,
        }
    }

    fn stepper(&self) -> Stepper {
        match self {
            IncrementDist::FairSign => Stepper::Bits(1),
            IncrementDist::ThreePoint { p } if *p == 0.5 => Stepper::Bits(1),
            IncrementDist::ThreePoint { p } if *p == 0.25 => Stepper::Bits(2),
            IncrementDist::ThreePoint { p } if *p == 0.125 => Stepper::Bits(3),
            IncrementDist::ThreePoint { p } => Stepper::Uniform(*p),
        }
    }

    /// Canonical config-file spelling of the distribution.
    pub fn describe(&self) -> String {
        match self {
            IncrementDist::FairSign => "fair".to_string(),
            IncrementDist::ThreePoint { p } => format!("three_point:{p:?}"),
        }
    }
}

/// How steps are drawn: dyadic weights come straight from raw bits
/// (one/two/three per step), everything else from a uniform f64.
enum Stepper {
    Bits(u32),
    Uniform(f64),
}

/// Running minimum of a walk of `steps` steps started at 0.
fn walk_min<R: RngCore>(rng: &mut R, steps: u64, stepper: &Stepper) -> i64 {
    let mut pos = 0i64;
    let mut min = 0i64;
    match stepper {
        Stepper::Bits(bits) => {
            let bits = *bits;
            let mask = (1u64 << bits) - 1;
            let top = mask;
            let mut buf = 0u64;
            let mut avail = 0u32;
            for _ in 0..steps {
                if avail < bits {
                    buf = rng.next_u64();
                    avail = 64;
                }
                let chunk = buf & mask;
                buf >>= bits;
                avail -= bits;
                // all-ones chunk steps up, all-zeros steps down
                pos += (chunk == top) as i64 - (chunk == 0) as i64;
                min = min.min(pos);
            }
        }
        Stepper::Uniform(p) => {
            let p = *p;
            for _ in 0..steps {
                let u = rand::Rng::gen::<f64>(rng);
                pos += (u >= 1.0 - p) as i64 - (u < p) as i64;
                min = min.min(pos);
            }
        }
    }
    min
}

/// Monte Carlo estimate of a minima comparison.
#[derive(Clone, Debug)]
pub struct MinimaComparisonEstimate {
    pub params: MinimaComparisonParams,
    pub empirical: f64,
    pub stderr: f64,
    pub successes: u64,
    pub trials: u64,
    pub walk_steps: u64,
    /// Zero-offset closed form for the same arm durations, as reference.
    pub closed_form: f64,
    pub increments: IncrementDist,
}

/// Header matching [`MinimaComparisonEstimate::csv_row`].
pub const ORACLE_CSV_HEADER: &str = "y,z,epsilon,closed_form,empirical,stderr,walk_steps,trials";

impl MinimaComparisonEstimate {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            fmt_sig6(self.params.y),
            fmt_sig6(self.params.z),
            fmt_sig6(self.params.epsilon),
            fmt_sig6(self.closed_form),
            fmt_sig6(self.empirical),
            fmt_sig6(self.stderr),
            self.walk_steps,
            self.trials,
        )
    }
}

/// Estimate `P(min_left - epsilon * sqrt(walk_steps) < min_right)` for
/// independent walks of `ceil(y * walk_steps)` and `ceil(z * walk_steps)`
/// steps. Ties are not successes, matching the strict comparison in the
/// continuum statement.
///
/// Deterministic in `(seed, trial id)`; trials run in parallel and merge
/// by counting.
pub fn simulate_minima_comparison(
    params: &MinimaComparisonParams,
    walk_steps: u64,
    trials: u64,
    seed: u64,
    increments: IncrementDist,
) -> Result<MinimaComparisonEstimate> {
    increments.validate()?;
    if walk_steps < 1000 {
        return Err(Error::arg(format!(
            "walk_steps must be at least 1000 for a usable diffusive regime (got {walk_steps})"
        )));
    }
    if trials == 0 {
        return Err(Error::arg("need at least one trial"));
    }
    let steps_left = (params.y * walk_steps as f64).ceil() as u64;
    let steps_right = (params.z * walk_steps as f64).ceil() as u64;
    let offset = params.epsilon * (walk_steps as f64).sqrt();

    let successes: u64 = (0..trials)
        .into_par_iter()
        .fold(
            || 0u64,
            |acc, trial| {
                let mut rng = trial_rng(seed, trial);
                let stepper = increments.stepper();
                let min_left = walk_min(&mut rng, steps_left, &stepper);
                let min_right = walk_min(&mut rng, steps_right, &stepper);
                acc + u64::from((min_left as f64 - offset) < min_right as f64)
            },
        )
        .sum();

    let empirical = successes as f64 / trials as f64;
    let stderr = (empirical * (1.0 - empirical) / trials as f64).sqrt();
    let closed_form = FRAC_2_PI * (params.y / params.z).sqrt().atan();
    Ok(MinimaComparisonEstimate {
        params: *params,
        empirical,
        stderr,
        successes,
        trials,
        walk_steps,
        closed_form,
        increments,
    })
}

/// Density of the minimum of a standard Brownian motion on `[0, 1]`,
/// evaluated at `m <= 0`: by the reflection principle the minimum is
/// distributed as `-|N(0,1)|`, with density `2 * phi(m)`.
pub fn brownian_min_density(m: f64) -> Result<f64> {
    if !m.is_finite() || m > 0.0 {
        return Err(Error::arg(format!(
            "the running minimum is nonpositive (got {m})"
        )));
    }
    Ok(2.0 * (-0.5 * m * m).exp() / (2.0 * std::f64::consts::PI).sqrt())
}

/// CDF of the same minimum: `P(min <= m) = 2 * Phi(m)` for `m <= 0`.
///
/// Uses the Abramowitz-Stegun 7.1.26 rational approximation of the error
/// function (absolute error below 2e-7, far inside Monte Carlo noise).
pub fn brownian_min_cdf(m: f64) -> Result<f64> {
    if !m.is_finite() || m > 0.0 {
        return Err(Error::arg(format!(
            "the running minimum is nonpositive (got {m})"
        )));
    }
    Ok(2.0 * standard_normal_cdf(m))
}

fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.327_591_1 * x);
    let poly = t
        * (0.254_829_592
            + t * (-0.284_496_736 + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    sign * (1.0 - poly * (-x * x).exp())
}
