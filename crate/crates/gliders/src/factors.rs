//! Defect factors: projecting richer automata onto glider rules.
//!
//! Several classical automata organize themselves into homogeneous blocks
//! whose boundaries ("defects") move ballistically and annihilate in
//! pairs, exactly like glider particles. A [`FactorSpec`] bundles a source
//! rule, a classification of order-`r` words into +1 / -1 / no defect, and
//! the target `(v-, v+)` rule; [`defect_projection`] reads the defects off
//! a window, and [`commutation_check`] verifies the factor identity
//! `project(step(a)) = step(project(a))` — the ground truth for whether a
//! proposed defect structure is correct.
//!
//! Entry-time laws transport through such factors whenever the projected
//! measure keeps a balanced, diffusive walk; [`lifted_cdf_experiment`]
//! runs that experiment end to end.

use crate::ca::{step, ConfigurationWindow, GlidersRule, LocalRule, SIGNED_ALPHABET};
use crate::entrytime::{
    entry_time, horizon_for, required_walk_range, theoretical_cdf, validate_grid, EmpiricalCdf,
    EntryTimeResult, Side,
};
use crate::error::{Error, Result};
use crate::measures::{diagnostics_of_series, sample_window, MixDiagnostics, SamplerSpec};
use crate::rng::trial_rng;
use crate::walks::partial_sums;
use rand::Rng;
use rayon::prelude::*;

/// Defect structure: which order-`r` words of the source subshift count
/// as +1 defects and which as -1 defects.
#[derive(Clone, Debug)]
pub struct SftSpec {
    alphabet_size: u8,
    order: usize,
    /// classification by word code (leftmost symbol most significant):
    /// encoded glider states 0 (-1), 1 (none), 2 (+1)
    class: Vec<u8>,
    plus_words: Vec<Vec<u8>>,
    minus_words: Vec<Vec<u8>>,
}

impl SftSpec {
    pub fn new(
        alphabet_size: u8,
        order: usize,
        plus_words: Vec<Vec<u8>>,
        minus_words: Vec<Vec<u8>>,
    ) -> Result<SftSpec> {
        if alphabet_size == 0 {
            return Err(Error::arg("alphabet size must be positive"));
        }
        if order == 0 {
            return Err(Error::arg("word order must be at least 1"));
        }
        let total = (alphabet_size as usize)
            .checked_pow(order as u32)
            .filter(|&n| n <= 1 << 22)
            .ok_or_else(|| Error::arg("word table too large (alphabet^order over 2^22)"))?;
        let mut class = vec![1u8; total];
        let code_of = |word: &[u8]| -> Result<usize> {
            if word.len() != order {
                return Err(Error::arg(format!(
                    "defect word {word:?} has length {}, expected {order}",
                    word.len()
                )));
            }
            let mut code = 0usize;
            for &s in word {
                if s >= alphabet_size {
                    return Err(Error::StateOutOfRange {
                        state: s,
                        alphabet: alphabet_size,
                    });
                }
                code = code * alphabet_size as usize + s as usize;
            }
            Ok(code)
        };
        for w in &plus_words {
            class[code_of(w)?] = 2;
        }
        for w in &minus_words {
            let code = code_of(w)?;
            if class[code] == 2 {
                return Err(Error::arg(format!(
                    "word {w:?} classified as both +1 and -1 defect"
                )));
            }
            class[code] = 0;
        }
        Ok(SftSpec {
            alphabet_size,
            order,
            class,
            plus_words,
            minus_words,
        })
    }

    pub fn alphabet_size(&self) -> u8 {
        self.alphabet_size
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn plus_words(&self) -> &[Vec<u8>] {
        &self.plus_words
    }

    pub fn minus_words(&self) -> &[Vec<u8>] {
        &self.minus_words
    }

    /// Signed defect class of one word of length `order`.
    pub fn classify(&self, word: &[u8]) -> Result<i8> {
        if word.len() != self.order {
            return Err(Error::arg(format!(
                "word length {} does not match order {}",
                word.len(),
                self.order
            )));
        }
        let mut code = 0usize;
        for &s in word {
            if s >= self.alphabet_size {
                return Err(Error::StateOutOfRange {
                    state: s,
                    alphabet: self.alphabet_size,
                });
            }
            code = code * self.alphabet_size as usize + s as usize;
        }
        Ok(self.class[code] as i8 - 1)
    }
}

/// Read the defect configuration off a source window.
///
/// Output cell `j` classifies the word `a[j .. j + order - 1]`, so the
/// window keeps its offset and loses `order - 1` cells on the right.
pub fn defect_projection(
    config: &ConfigurationWindow,
    sft: &SftSpec,
) -> Result<ConfigurationWindow> {
    if config.alphabet_size() != sft.alphabet_size {
        return Err(Error::AlphabetMismatch {
            rule_alphabet: sft.alphabet_size,
            window_alphabet: config.alphabet_size(),
        });
    }
    if config.len() < sft.order {
        return Err(Error::WindowTooShort {
            need: sft.order,
            got: config.len(),
        });
    }
    let k = sft.alphabet_size as usize;
    let cells: Vec<u8> = config
        .cells()
        .windows(sft.order)
        .map(|w| {
            let mut code = 0usize;
            for &s in w {
                code = code * k + s as usize;
            }
            sft.class[code]
        })
        .collect();
    ConfigurationWindow::new(config.offset(), cells, SIGNED_ALPHABET)
}

/// A source automaton together with its defect factor onto a glider rule.
#[derive(Clone, Debug)]
pub struct FactorSpec {
    name: String,
    source: LocalRule,
    sft: SftSpec,
    target: GlidersRule,
}

impl FactorSpec {
    pub fn new(
        name: impl Into<String>,
        source: LocalRule,
        sft: SftSpec,
        target: GlidersRule,
    ) -> Result<FactorSpec> {
        let name = name.into();
        if source.alphabet_size() != sft.alphabet_size() {
            return Err(Error::InvalidFactor {
                name,
                reason: format!(
                    "source alphabet {} does not match defect alphabet {}",
                    source.alphabet_size(),
                    sft.alphabet_size()
                ),
            });
        }
        Ok(FactorSpec {
            name,
            source,
            sft,
            target,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &LocalRule {
        &self.source
    }

    pub fn sft(&self) -> &SftSpec {
        &self.sft
    }

    pub fn target(&self) -> GlidersRule {
        self.target
    }

    /// Smallest window width on which both commutation paths overlap.
    pub fn min_check_width(&self) -> usize {
        2 * self.source.radius().max(self.target.radius()) + self.sft.order()
    }
}

/// One failing input of a commutation check, with both evaluation paths.
#[derive(Clone, Debug)]
pub struct CommutationCounterexample {
    pub input: ConfigurationWindow,
    /// project(step(input))
    pub via_source: ConfigurationWindow,
    /// step(project(input))
    pub via_target: ConfigurationWindow,
}

/// Outcome of a commutation check.
#[derive(Clone, Debug)]
pub struct CommutationReport {
    pub checked: u64,
    pub counterexample: Option<CommutationCounterexample>,
}

impl CommutationReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Compare `project(step(a))` with `step(project(a))` on their common
/// domain. Returns a counterexample if they differ.
fn compare_paths(factor: &FactorSpec, input: &ConfigurationWindow) -> Result<Option<CommutationCounterexample>> {
    let via_source = defect_projection(&step(input, &factor.source)?, &factor.sft)?;
    let target_local = factor.target.local();
    let via_target = step(&defect_projection(input, &factor.sft)?, &target_local)?;
    let lo = via_source.lo().max(via_target.lo());
    let hi = via_source.hi().min(via_target.hi());
    if lo > hi {
        return Err(Error::WindowTooShort {
            need: factor.min_check_width(),
            got: input.len(),
        });
    }
    for j in lo..=hi {
        if via_source.get(j) != via_target.get(j) {
            return Ok(Some(CommutationCounterexample {
                input: input.clone(),
                via_source,
                via_target,
            }));
        }
    }
    Ok(None)
}

/// Check commutation on `samples` uniformly random windows of `width`
/// cells. Deterministic in `seed`; stops at the first counterexample.
pub fn commutation_check(
    factor: &FactorSpec,
    width: usize,
    samples: u64,
    seed: u64,
) -> Result<CommutationReport> {
    if width < factor.min_check_width() {
        return Err(Error::WindowTooShort {
            need: factor.min_check_width(),
            got: width,
        });
    }
    let k = factor.source.alphabet_size();
    let offset = -((width / 2) as i64);
    for trial in 0..samples {
        let mut rng = trial_rng(seed, trial);
        let cells: Vec<u8> = (0..width).map(|_| rng.gen_range(0..k)).collect();
        let input = ConfigurationWindow::new(offset, cells, k)?;
        if let Some(cx) = compare_paths(factor, &input)? {
            return Ok(CommutationReport {
                checked: trial + 1,
                counterexample: Some(cx),
            });
        }
    }
    Ok(CommutationReport {
        checked: samples,
        counterexample: None,
    })
}

/// Check commutation on every window of `width` cells.
pub fn exhaustive_commutation_check(factor: &FactorSpec, width: usize) -> Result<CommutationReport> {
    if width < factor.min_check_width() {
        return Err(Error::WindowTooShort {
            need: factor.min_check_width(),
            got: width,
        });
    }
    let k = factor.source.alphabet_size() as u64;
    let total = k
        .checked_pow(width as u32)
        .filter(|&n| n <= 1 << 22)
        .ok_or_else(|| Error::arg("exhaustive check too large (alphabet^width over 2^22)"))?;
    let offset = -((width / 2) as i64);
    let mut cells = vec![0u8; width];
    for code in 0..total {
        let mut rem = code;
        for slot in cells.iter_mut().rev() {
            *slot = (rem % k) as u8;
            rem /= k;
        }
        let input = ConfigurationWindow::new(offset, cells.clone(), k as u8)?;
        if let Some(cx) = compare_paths(factor, &input)? {
            return Ok(CommutationReport {
                checked: code + 1,
                counterexample: Some(cx),
            });
        }
    }
    Ok(CommutationReport {
        checked: total,
        counterexample: None,
    })
}

/// Traffic rule: cars (1s) advance right into empty cells.
///
/// The free-flowing background alternates 01; a `00` word is a gap defect
/// travelling right, a `11` word a jam defect travelling left, and they
/// annihilate, giving the `(-1, 1)` rule.
pub fn traffic_factor() -> FactorSpec {
    let source = LocalRule::from_fn(1, 2, |w| {
        u8::from((w[0] == 1 && w[1] == 0) || (w[1] == 1 && w[2] == 1))
    })
    .expect("tabulable");
    let sft = SftSpec::new(2, 2, vec![vec![0, 0]], vec![vec![1, 1]]).expect("valid words");
    let target = GlidersRule::new(-1, 1).expect("valid speeds");
    FactorSpec::new("traffic", source, sft, target).expect("consistent factor")
}

/// Cyclic three-state rule: a cell advances to the next state mod 3 when
/// either neighbour already carries it.
///
/// Between constant blocks, a descending boundary (`s` followed by `s-1`)
/// chases right while an ascending one chases left; boundaries meet and
/// cancel, giving the `(-1, 1)` rule.
pub fn cyclic3_factor() -> FactorSpec {
    let source = LocalRule::from_fn(1, 3, |w| {
        let next = (w[1] + 1) % 3;
        if w[0] == next || w[2] == next {
            next
        } else {
            w[1]
        }
    })
    .expect("tabulable");
    let sft = SftSpec::new(
        3,
        2,
        vec![vec![1, 0], vec![2, 1], vec![0, 2]],
        vec![vec![0, 1], vec![1, 2], vec![2, 0]],
    )
    .expect("valid words");
    let target = GlidersRule::new(-1, 1).expect("valid speeds");
    FactorSpec::new("cyclic3", source, sft, target).expect("consistent factor")
}

/// Captive rule: each cell chooses between itself and its right neighbour
/// through `choice`, so block boundaries either stand still (`choice`
/// keeps the left state) or sweep left (`choice` takes the right state).
///
/// A mixed choice function does not factor exactly: when a standing
/// boundary absorbs a moving one, the leftover word straddles the two
/// outer blocks and generally still looks like a defect, while the target
/// rule demands an annihilation. The constructor therefore verifies
/// commutation exhaustively on a small window and rejects choices that
/// fail, reporting the offending configuration.
pub fn captive_factor(
    alphabet_size: u8,
    choice: impl Fn(u8, u8) -> u8 + Send + Sync + 'static,
) -> Result<FactorSpec> {
    if alphabet_size < 2 {
        return Err(Error::arg("captive rule needs at least two states"));
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for a in 0..alphabet_size {
        for b in 0..alphabet_size {
            let picked = choice(a, b);
            if picked != a && picked != b {
                return Err(Error::InvalidFactor {
                    name: "captive".to_string(),
                    reason: format!("choice({a}, {b}) = {picked} is neither argument"),
                });
            }
            if a != b {
                // boundary between an a-block and a b-block: keeping `a`
                // leaves it standing (+1 under a (-1, 0) target), taking
                // `b` drags it left (-1)
                if picked == a {
                    plus.push(vec![a, b]);
                } else {
                    minus.push(vec![a, b]);
                }
            }
        }
    }
    let source = LocalRule::from_fn(1, alphabet_size, move |w| choice(w[1], w[2]))?;
    let sft = SftSpec::new(alphabet_size, 2, plus, minus)?;
    let target = GlidersRule::new(-1, 0).expect("valid speeds");
    let factor = FactorSpec::new("captive", source, sft, target)?;
    let probe_width = factor.min_check_width() + 3;
    let report = exhaustive_commutation_check(&factor, probe_width)?;
    if let Some(cx) = report.counterexample {
        return Err(Error::InvalidFactor {
            name: "captive".to_string(),
            reason: format!(
                "choice function does not commute with the target rule; \
                 counterexample cells {:?}",
                cx.input.cells()
            ),
        });
    }
    Ok(factor)
}

/// Captive rule that always keeps the left state: every boundary stands.
pub fn captive_identity_factor(alphabet_size: u8) -> Result<FactorSpec> {
    let mut f = captive_factor(alphabet_size, |a, _| a)?;
    f.name = "captive_identity".to_string();
    Ok(f)
}

/// Captive rule that always takes the right state: every boundary sweeps left.
pub fn captive_shift_factor(alphabet_size: u8) -> Result<FactorSpec> {
    let mut f = captive_factor(alphabet_size, |_, b| b)?;
    f.name = "captive_shift".to_string();
    Ok(f)
}

/// Multiplicative rule `u_-1 * u_0 * u_1`: a 1-block erodes one cell per
/// side per step, so its left edge (a `01` boundary) chases right at +1 and
/// its right edge (a `10` boundary) chases left at -1; the factor targets
/// `(-1, 1)`.
///
/// This is the standing counterexample to measure transport: the projected
/// walk telescopes to `x_k - x_0`, which is bounded, so the projected
/// measure has zero diffusion and entry times blow up rather than follow
/// the target law.
pub fn product_factor() -> FactorSpec {
    let source = LocalRule::from_fn(1, 2, |w| w[0] * w[1] * w[2]).expect("tabulable");
    let sft = SftSpec::new(2, 2, vec![vec![0, 1]], vec![vec![1, 0]]).expect("valid words");
    let target = GlidersRule::new(-1, 1).expect("valid speeds");
    FactorSpec::new("product", source, sft, target).expect("consistent factor")
}

/// Look up a built-in factor by name.
pub fn builtin_factor(name: &str) -> Result<FactorSpec> {
    match name {
        "traffic" => Ok(traffic_factor()),
        "cyclic3" => Ok(cyclic3_factor()),
        "captive_identity" => captive_identity_factor(3),
        "captive_shift" => captive_shift_factor(3),
        "product" => Ok(product_factor()),
        other => Err(Error::InvalidFactor {
            name: other.to_string(),
            reason: "unknown factor; built-ins are traffic, cyclic3, \
                     captive_identity, captive_shift, product"
                .to_string(),
        }),
    }
}

/// Entry-time experiment through a factor: sample the source measure,
/// project, and measure entry times against the target law.
pub fn lifted_cdf_experiment(
    factor: &FactorSpec,
    sampler: &SamplerSpec,
    n: u64,
    xs: &[f64],
    trials: u64,
    side: Side,
) -> Result<EmpiricalCdf> {
    if sampler.alphabet_size() != factor.source.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            rule_alphabet: factor.source.alphabet_size(),
            window_alphabet: sampler.alphabet_size(),
        });
    }
    if n == 0 || trials == 0 {
        return Err(Error::arg("n and trials must be positive"));
    }
    let max_x = validate_grid(xs)?;
    let horizon = horizon_for(n, max_x);
    let rule = factor.target;
    if side == Side::Plus && rule.v_plus() == 0 {
        return Err(Error::arg(
            "plus side requires v_plus > 0 (the +1 window would be empty)",
        ));
    }
    let (walk_lo, walk_hi) = required_walk_range(rule, n, horizon, side);
    // projected window must supply cells [walk_lo.min(0), walk_hi - 1],
    // so the source window extends order - 1 further right
    let cell_lo = walk_lo.min(0);
    let cell_hi = walk_hi - 1 + factor.sft.order() as i64 - 1;

    let thresholds: Vec<f64> = xs.iter().map(|&x| x * n as f64).collect();
    let counts = (0..trials)
        .into_par_iter()
        .try_fold(
            || vec![0u64; xs.len()],
            |mut acc, trial| -> Result<Vec<u64>> {
                let source = sample_window(sampler, cell_lo, cell_hi, trial)?;
                let projected = defect_projection(&source, &factor.sft)?;
                let walk = partial_sums(&projected)?;
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
        factor_name: Some(factor.name.clone()),
    })
}

/// Reference lifted entry time: simulate the source automaton and watch
/// the projected window directly. Quadratic; for validating
/// [`lifted_cdf_experiment`]'s walk-based path.
pub fn lifted_entry_time_by_simulation(
    factor: &FactorSpec,
    source: &ConfigurationWindow,
    n: u64,
    horizon: u64,
    side: Side,
) -> Result<EntryTimeResult> {
    let rule = factor.target;
    let (width, wanted) = match side {
        Side::Minus => (-rule.v_minus(), 0u8),
        Side::Plus => {
            if rule.v_plus() == 0 {
                return Err(Error::arg(
                    "plus side requires v_plus > 0 (the +1 window would be empty)",
                ));
            }
            (rule.v_plus(), 2u8)
        }
    };
    let r = factor.source.radius() as i64;
    let order = factor.sft.order() as i64;
    let m = (n + horizon) as i64;
    let need_hi = width - 1 + order - 1 + r * m;
    let need_lo = -r * m;
    if source.lo() > need_lo || source.hi() < need_hi {
        return Err(Error::WindowTooShort {
            need: (need_hi - need_lo + 1) as usize,
            got: source.len(),
        });
    }
    let mut current = source.clone();
    let mut time = None;
    for t in 0..=(n + horizon) {
        if t >= n {
            let projected = defect_projection(&current, &factor.sft)?;
            let hit = (0..width).any(|i| projected.get(i) == Some(wanted));
            if hit {
                time = Some(t - n);
                break;
            }
        }
        if t < n + horizon {
            current = step(&current, &factor.source)?;
        }
    }
    Ok(EntryTimeResult {
        time,
        horizon,
        n,
        side,
    })
}

/// Mixing diagnostics of the projected defect sequence under `sampler`.
pub fn diagnose_projected(
    factor: &FactorSpec,
    sampler: &SamplerSpec,
    sample_length: usize,
    lag: usize,
) -> Result<MixDiagnostics> {
    if sampler.alphabet_size() != factor.source.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            rule_alphabet: factor.source.alphabet_size(),
            window_alphabet: sampler.alphabet_size(),
        });
    }
    if sample_length < 2 {
        return Err(Error::arg("sample length must be at least 2"));
    }
    let order = factor.sft.order();
    let source = sample_window(sampler, 0, sample_length as i64 + order as i64 - 2, 0)?;
    let projected = defect_projection(&source, &factor.sft)?;
    let series: Vec<f64> = projected.cells().iter().map(|&s| s as f64 - 1.0).collect();
    diagnostics_of_series(&series, lag)
}
