//! Finite configuration windows and one-dimensional local rules.
//!
//! Configurations live on arbitrary windows `[lo, hi]` of the integer line.
//! Stepping a rule of radius `r` shrinks the window by `r` on each side:
//! there is no wraparound and no padding, so every cell of the output is
//! fully determined by the input. The three-state alphabet used by the
//! glider rules encodes signed states as `-1 -> 0`, `0 -> 1`, `+1 -> 2`.

use crate::error::{Error, Result};
use std::sync::Arc;

/// Alphabet size of the signed three-state rules.
pub const SIGNED_ALPHABET: u8 = 3;

/// Encode a signed state (-1, 0, +1) into the fixed u8 representation.
pub fn encode_signed(value: i8) -> Result<u8> {
    match value {
        -1 => Ok(0),
        0 => Ok(1),
        1 => Ok(2),
        _ => Err(Error::StateOutOfRange {
            state: value as u8,
            alphabet: SIGNED_ALPHABET,
        }),
    }
}

/// Decode a u8 state back into its signed value.
pub fn decode_signed(state: u8) -> Result<i8> {
    match state {
        0 => Ok(-1),
        1 => Ok(0),
        2 => Ok(1),
        _ => Err(Error::StateOutOfRange {
            state,
            alphabet: SIGNED_ALPHABET,
        }),
    }
}

/// A finite stretch of cells, anchored at an absolute index.
///
/// `offset` is the absolute index of `cells[0]`; the window covers
/// `[offset, offset + len - 1]`. Cell values are states in
/// `0..alphabet_size`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigurationWindow {
    offset: i64,
    cells: Vec<u8>,
    alphabet_size: u8,
}

impl ConfigurationWindow {
    pub fn new(offset: i64, cells: Vec<u8>, alphabet_size: u8) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::EmptyWindow);
        }
        if alphabet_size == 0 {
            return Err(Error::arg("alphabet size must be positive"));
        }
        if let Some(&bad) = cells.iter().find(|&&c| c >= alphabet_size) {
            return Err(Error::StateOutOfRange {
                state: bad,
                alphabet: alphabet_size,
            });
        }
        Ok(ConfigurationWindow {
            offset,
            cells,
            alphabet_size,
        })
    }

    /// Build a three-state window from signed values.
    pub fn from_signed(offset: i64, values: &[i8]) -> Result<Self> {
        let cells = values
            .iter()
            .map(|&v| encode_signed(v))
            .collect::<Result<Vec<u8>>>()?;
        ConfigurationWindow::new(offset, cells, SIGNED_ALPHABET)
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor rejects empty windows
    }

    pub fn alphabet_size(&self) -> u8 {
        self.alphabet_size
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    /// Absolute index of the leftmost cell.
    pub fn lo(&self) -> i64 {
        self.offset
    }

    /// Absolute index of the rightmost cell.
    pub fn hi(&self) -> i64 {
        self.offset + self.cells.len() as i64 - 1
    }

    /// Cell state at absolute index, if inside the window.
    pub fn get(&self, index: i64) -> Option<u8> {
        if index < self.lo() || index > self.hi() {
            return None;
        }
        Some(self.cells[(index - self.offset) as usize])
    }

    /// Signed state at absolute index (three-state windows only).
    pub fn signed(&self, index: i64) -> Option<i8> {
        self.get(index).map(|s| s as i8 - 1)
    }

    /// All cells as signed values (three-state windows only).
    pub fn signed_cells(&self) -> Result<Vec<i8>> {
        if self.alphabet_size != SIGNED_ALPHABET {
            return Err(Error::AlphabetMismatch {
                rule_alphabet: SIGNED_ALPHABET,
                window_alphabet: self.alphabet_size,
            });
        }
        Ok(self.cells.iter().map(|&s| s as i8 - 1).collect())
    }

    /// Reflect the window around `pivot` and negate every state:
    /// the result has cell `-a[pivot - j]` at index `j`. Three-state only.
    ///
    /// This is the conjugation that swaps the two particle species, mapping
    /// a `(v-, v+)` evolution onto a `(-v+, -v-)` one.
    pub fn reflect_negate(&self, pivot: i64) -> Result<Self> {
        if self.alphabet_size != SIGNED_ALPHABET {
            return Err(Error::AlphabetMismatch {
                rule_alphabet: SIGNED_ALPHABET,
                window_alphabet: self.alphabet_size,
            });
        }
        // new index j holds -a[pivot - j]; j ranges over [pivot - hi, pivot - lo]
        let cells: Vec<u8> = self.cells.iter().rev().map(|&s| 2 - s).collect();
        ConfigurationWindow::new(pivot - self.hi(), cells, SIGNED_ALPHABET)
    }
}

enum RuleKind {
    /// Full transition table, indexed by the base-|A| number whose most
    /// significant digit is the leftmost neighbourhood cell.
    Table(Vec<u8>),
    Func(Arc<dyn Fn(&[u8]) -> u8 + Send + Sync>),
}

impl Clone for RuleKind {
    fn clone(&self) -> Self {
        match self {
            RuleKind::Table(t) => RuleKind::Table(t.clone()),
            RuleKind::Func(f) => RuleKind::Func(Arc::clone(f)),
        }
    }
}

/// Largest transition table we are willing to materialize.
const MAX_TABLE_ENTRIES: usize = 1 << 20;

/// A local rule of some radius over a finite alphabet.
///
/// Rules built through [`LocalRule::from_fn`] are tabulated up front whenever
/// the table fits in [`MAX_TABLE_ENTRIES`], so the per-cell cost of
/// [`step`] is a single lookup in the common case.
#[derive(Clone)]
pub struct LocalRule {
    radius: usize,
    alphabet_size: u8,
    kind: RuleKind,
}

impl std::fmt::Debug for LocalRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LocalRule")
            .field("radius", &self.radius)
            .field("alphabet_size", &self.alphabet_size)
            .finish()
    }
}

impl LocalRule {
    /// Wrap an arbitrary function of the `2 * radius + 1` neighbourhood.
    ///
    /// The function must return states below `alphabet_size`; this is
    /// checked during tabulation, or deferred to `apply` for rules too wide
    /// to tabulate.
    pub fn from_fn<F>(radius: usize, alphabet_size: u8, rule: F) -> Result<Self>
    where
        F: Fn(&[u8]) -> u8 + Send + Sync + 'static,
    {
        if alphabet_size == 0 {
            return Err(Error::arg("alphabet size must be positive"));
        }
        let width = 2 * radius + 1;
        let entries = (alphabet_size as usize).checked_pow(width as u32);
        let kind = match entries {
            Some(n) if n <= MAX_TABLE_ENTRIES => {
                let mut table = vec![0u8; n];
                let mut window = vec![0u8; width];
                for (code, slot) in table.iter_mut().enumerate() {
                    // decode `code` into the neighbourhood, leftmost digit first
                    let mut rem = code;
                    for i in (0..width).rev() {
                        window[i] = (rem % alphabet_size as usize) as u8;
                        rem /= alphabet_size as usize;
                    }
                    let out = rule(&window);
                    if out >= alphabet_size {
                        return Err(Error::StateOutOfRange {
                            state: out,
                            alphabet: alphabet_size,
                        });
                    }
                    *slot = out;
                }
                RuleKind::Table(table)
            }
            _ => RuleKind::Func(Arc::new(rule)),
        };
        Ok(LocalRule {
            radius,
            alphabet_size,
            kind,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn alphabet_size(&self) -> u8 {
        self.alphabet_size
    }

    /// Neighbourhood width `2 * radius + 1`.
    pub fn width(&self) -> usize {
        2 * self.radius + 1
    }

    /// Evaluate the rule on one neighbourhood.
    pub fn apply(&self, window: &[u8]) -> Result<u8> {
        if window.len() != self.width() {
            return Err(Error::NeighbourhoodLengthMismatch {
                expected: self.width(),
                got: window.len(),
            });
        }
        Ok(self.apply_unchecked(window))
    }

    #[inline]
    fn apply_unchecked(&self, window: &[u8]) -> u8 {
        match &self.kind {
            RuleKind::Table(table) => {
                let mut code = 0usize;
                for &c in window {
                    code = code * self.alphabet_size as usize + c as usize;
                }
                table[code]
            }
            RuleKind::Func(f) => f(window),
        }
    }
}

/// Speed pair `(v-, v+)` with `v- < 0 <= v+`, defining a three-state rule
/// whose `-1` particles drift at speed `v-` and `+1` particles at `v+`,
/// annihilating on contact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GlidersRule {
    v_minus: i64,
    v_plus: i64,
}

impl GlidersRule {
    pub fn new(v_minus: i64, v_plus: i64) -> Result<Self> {
        if v_minus >= 0 {
            return Err(Error::InvalidSpeeds {
                v_minus,
                v_plus,
                reason: "v_minus must be negative",
            });
        }
        if v_plus < 0 {
            return Err(Error::InvalidSpeeds {
                v_minus,
                v_plus,
                reason: "v_plus must be nonnegative",
            });
        }
        Ok(GlidersRule { v_minus, v_plus })
    }

    pub fn v_minus(&self) -> i64 {
        self.v_minus
    }

    pub fn v_plus(&self) -> i64 {
        self.v_plus
    }

    /// Rule radius: `max(|v-|, v+)`.
    pub fn radius(&self) -> usize {
        self.v_minus.unsigned_abs().max(self.v_plus.unsigned_abs()) as usize
    }

    /// The species-swapped rule `(-v+, -v-)`.
    ///
    /// Only defined for `v+ > 0`; with `v+ = 0` the mirrored pair would
    /// have a nonnegative left speed.
    pub fn mirrored(&self) -> Result<GlidersRule> {
        GlidersRule::new(-self.v_plus, -self.v_minus)
    }

    /// Tabulated local rule realizing this speed pair.
    pub fn local(&self) -> LocalRule {
        let rule = *self;
        LocalRule::from_fn(rule.radius(), SIGNED_ALPHABET, move |w| {
            gliders_eval_encoded(rule, w)
        })
        .expect("glider local rule is always tabulable")
    }
}

/// Evaluate the glider rule on an encoded neighbourhood of width `2r + 1`.
fn gliders_eval_encoded(rule: GlidersRule, window: &[u8]) -> u8 {
    let r = rule.radius() as i64;
    let v_minus = rule.v_minus;
    let v_plus = rule.v_plus;
    let at = |t: i64| -> i64 { window[(t + r) as usize] as i64 - 1 };

    // A +1 at the origin descends from a +1 at -v+ whose forward path is not
    // blocked: every partial sum over (-v+, -v-] must stay nonnegative.
    if at(-v_plus) == 1 {
        let mut sum = 0i64;
        let mut ok = true;
        let mut t = -v_plus + 1;
        while t <= -v_minus {
            sum += at(t);
            if sum < 0 {
                ok = false;
                break;
            }
            t += 1;
        }
        if ok {
            return 2;
        }
    }

    // Symmetrically, a -1 descends from a -1 at -v- with every trailing sum
    // over [-v+, -v-) nonpositive.
    if at(-v_minus) == -1 {
        let mut sum = 0i64;
        let mut ok = true;
        let mut t = -v_minus - 1;
        while t >= -v_plus {
            sum += at(t);
            if sum > 0 {
                ok = false;
                break;
            }
            t -= 1;
        }
        if ok {
            return 0;
        }
    }

    1
}

/// Evaluate the glider rule on a signed neighbourhood of width `2r + 1`.
pub fn gliders_local_rule(rule: GlidersRule, window: &[i8]) -> Result<i8> {
    let width = 2 * rule.radius() + 1;
    if window.len() != width {
        return Err(Error::NeighbourhoodLengthMismatch {
            expected: width,
            got: window.len(),
        });
    }
    let encoded = window
        .iter()
        .map(|&v| encode_signed(v))
        .collect::<Result<Vec<u8>>>()?;
    decode_signed(gliders_eval_encoded(rule, &encoded))
}

/// Apply one step of `rule` to `config`.
///
/// The output covers `[lo + r, hi - r]`; the window must be wide enough to
/// leave at least one cell.
pub fn step(config: &ConfigurationWindow, rule: &LocalRule) -> Result<ConfigurationWindow> {
    if config.alphabet_size() != rule.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            rule_alphabet: rule.alphabet_size(),
            window_alphabet: config.alphabet_size(),
        });
    }
    let width = rule.width();
    if config.len() < width {
        return Err(Error::WindowTooShort {
            need: width,
            got: config.len(),
        });
    }
    let cells = match &rule.kind {
        // Roll the table code across the window instead of re-encoding all
        // `width` cells at every position: drop the outgoing top digit, shift,
        // append the incoming cell.
        RuleKind::Table(table) => {
            let k = rule.alphabet_size() as usize;
            let top = table.len() / k;
            let input = config.cells();
            let mut code: usize = input[..width].iter().fold(0, |c, &s| c * k + s as usize);
            let mut out = Vec::with_capacity(input.len() - width + 1);
            out.push(table[code]);
            for i in width..input.len() {
                code = (code - input[i - width] as usize * top) * k + input[i] as usize;
                out.push(table[code]);
            }
            out
        }
        RuleKind::Func(_) => config
            .cells()
            .windows(width)
            .map(|w| rule.apply_unchecked(w))
            .collect(),
    };
    ConfigurationWindow::new(
        config.offset() + rule.radius() as i64,
        cells,
        rule.alphabet_size(),
    )
}

/// Iterate `step` for `steps` steps, collecting every configuration.
///
/// The result holds `steps + 1` windows, the input first. The input must be
/// wide enough that the final window is nonempty: `len > 2 * r * steps`.
pub fn simulate(
    config: &ConfigurationWindow,
    rule: &LocalRule,
    steps: usize,
) -> Result<Vec<ConfigurationWindow>> {
    let need = 2 * rule.radius() * steps + 1;
    if config.len() < need {
        return Err(Error::WindowTooShort {
            need,
            got: config.len(),
        });
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(config.clone());
    for _ in 0..steps {
        let next = step(out.last().expect("nonempty"), rule)?;
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(values: &[i8]) -> ConfigurationWindow {
        ConfigurationWindow::from_signed(0, values).unwrap()
    }

    #[test]
    fn encoding_round_trips() {
        for v in [-1i8, 0, 1] {
            assert_eq!(decode_signed(encode_signed(v).unwrap()).unwrap(), v);
        }
        assert!(encode_signed(2).is_err());
        assert!(decode_signed(3).is_err());
    }

    #[test]
    fn window_accessors() {
        let w = ConfigurationWindow::from_signed(-2, &[-1, 0, 1, 1]).unwrap();
        assert_eq!((w.lo(), w.hi()), (-2, 1));
        assert_eq!(w.signed(-2), Some(-1));
        assert_eq!(w.signed(1), Some(1));
        assert_eq!(w.signed(2), None);
        assert_eq!(w.signed_cells().unwrap(), vec![-1, 0, 1, 1]);
    }

    #[test]
    fn empty_window_rejected() {
        assert!(matches!(
            ConfigurationWindow::new(0, vec![], 3),
            Err(Error::EmptyWindow)
        ));
    }

    #[test]
    fn out_of_range_state_rejected() {
        assert!(ConfigurationWindow::new(0, vec![0, 3], 3).is_err());
    }

    #[test]
    fn speeds_validated() {
        assert!(GlidersRule::new(0, 1).is_err());
        assert!(GlidersRule::new(1, 1).is_err());
        assert!(GlidersRule::new(-1, -1).is_err());
        assert!(GlidersRule::new(-1, 0).is_ok());
        assert_eq!(GlidersRule::new(-3, 1).unwrap().radius(), 3);
        assert_eq!(GlidersRule::new(-1, 2).unwrap().radius(), 2);
    }

    #[test]
    fn mirrored_swaps_speeds() {
        let rule = GlidersRule::new(-3, 1).unwrap();
        let m = rule.mirrored().unwrap();
        assert_eq!((m.v_minus(), m.v_plus()), (-1, 3));
        // v+ = 0 cannot be mirrored: the -1 species would get speed 0
        assert!(GlidersRule::new(-1, 0).unwrap().mirrored().is_err());
    }

    /// For (-1, 0): +1 stands still, -1 moves left, adjacent +- annihilate.
    #[test]
    fn simple_gliders_single_step() {
        let rule = GlidersRule::new(-1, 0).unwrap().local();
        // +1 . . -1 . -> step -> . +1(stays) -1(moved)... but they collide?
        let w = window(&[1, 0, 0, -1, 0]);
        let next = step(&w, &rule).unwrap();
        assert_eq!(next.offset(), 1);
        assert_eq!(next.signed_cells().unwrap(), vec![0, -1, 0]);
        // the +1 at index 0 is preserved where the window still sees it
        let w2 = window(&[0, 1, 0, 0, -1]);
        let next2 = step(&w2, &rule).unwrap();
        assert_eq!(next2.signed_cells().unwrap(), vec![1, 0, -1]);
    }

    /// Adjacent +1 -1 under (-1, 0) annihilate in one step.
    #[test]
    fn simple_gliders_annihilation() {
        let rule = GlidersRule::new(-1, 0).unwrap().local();
        let w = window(&[0, 1, -1, 0, 0]);
        let next = step(&w, &rule).unwrap();
        assert_eq!(next.signed_cells().unwrap(), vec![0, 0, 0]);
    }

    /// Worked (-1, 1) evolution: +1 at 0 and -1 at 4 meet and annihilate.
    #[test]
    fn opposing_gliders_annihilate() {
        let rule = GlidersRule::new(-1, 1).unwrap().local();
        let w = window(&[1, 0, 0, 0, -1]);
        let t1 = step(&w, &rule).unwrap();
        assert_eq!(t1.offset(), 1);
        assert_eq!(t1.signed_cells().unwrap(), vec![1, 0, -1]);
        let t2 = step(&t1, &rule).unwrap();
        assert_eq!(t2.offset(), 2);
        assert_eq!(t2.signed_cells().unwrap(), vec![0]);
    }

    /// Two particles of the same sign never interact.
    #[test]
    fn same_species_pass_through_nothing() {
        let rule = GlidersRule::new(-1, 1).unwrap().local();
        let w = window(&[0, 1, 1, 0, 0, 0]);
        let t1 = step(&w, &rule).unwrap();
        assert_eq!(t1.offset(), 1);
        assert_eq!(t1.signed_cells().unwrap(), vec![0, 1, 1, 0]);
    }

    /// (-2, 1): the -1 species jumps two cells left per step.
    #[test]
    fn fast_minus_species() {
        let rule = GlidersRule::new(-2, 1).unwrap().local();
        let w = window(&[0, 0, 0, 0, -1, 0, 0, 0, 0]);
        let t1 = step(&w, &rule).unwrap();
        assert_eq!(t1.offset(), 2);
        assert_eq!(t1.signed_cells().unwrap(), vec![-1, 0, 0, 0, 0]);
    }

    #[test]
    fn charge_is_conserved_without_boundary_loss() {
        // The visible window loses radius() cells per side per step, so pad the
        // core with 2 * radius() * steps zeros: a particle starting inside the
        // core moves at most radius() per step and stays in view throughout.
        let rule = GlidersRule::new(-2, 1).unwrap();
        let local = rule.local();
        let core: Vec<i8> = vec![1, -1, 0, 1, 1, -1, 0, 0, -1, 1, -1, -1, 1, 0, 1];
        let steps = 4;
        let pad = 2 * rule.radius() * steps;
        let mut cells = vec![0i8; pad];
        cells.extend_from_slice(&core);
        cells.extend(std::iter::repeat(0i8).take(pad));
        let charge: i64 = core.iter().map(|&v| v as i64).sum();
        let mut w = window(&cells);
        for _ in 0..steps {
            w = step(&w, &local).unwrap();
            let now: i64 = w
                .signed_cells()
                .unwrap()
                .iter()
                .map(|&v| v as i64)
                .sum();
            assert_eq!(now, charge);
        }
    }

    #[test]
    fn step_window_too_short() {
        let rule = GlidersRule::new(-3, 1).unwrap().local();
        let w = window(&[0, 0, 0]);
        assert!(matches!(
            step(&w, &rule),
            Err(Error::WindowTooShort { need: 7, got: 3 })
        ));
    }

    #[test]
    fn simulate_collects_all_generations() {
        let rule = GlidersRule::new(-1, 1).unwrap().local();
        let w = window(&[1, 0, 0, 0, -1]);
        let run = simulate(&w, &rule, 2).unwrap();
        assert_eq!(run.len(), 3);
        assert_eq!(run[0], w);
        assert_eq!(run[2].signed_cells().unwrap(), vec![0]);
        assert!(simulate(&w, &rule, 3).is_err());
    }

    #[test]
    fn reflect_negate_swaps_species() {
        let w = ConfigurationWindow::from_signed(2, &[1, 0, -1]).unwrap();
        // pivot 0: cell j = -a[-j]; a covers [2,4] so result covers [-4,-2]
        let m = w.reflect_negate(0).unwrap();
        assert_eq!((m.lo(), m.hi()), (-4, -2));
        assert_eq!(m.signed_cells().unwrap(), vec![1, 0, -1]);
        // double reflection is the identity
        assert_eq!(m.reflect_negate(0).unwrap(), w);
    }

    /// Mirror conjugation: evolving the reflection under the mirrored rule
    /// matches reflecting the evolution.
    #[test]
    fn reflect_conjugates_dynamics() {
        let rule = GlidersRule::new(-2, 1).unwrap();
        let local = rule.local();
        let mirrored = rule.mirrored().unwrap().local();
        let w = window(&[1, -1, 0, 0, 1, 0, -1, 1, 0, 0, -1, 0, 1]);
        let direct = step(&step(&w, &local).unwrap(), &local).unwrap();
        let reflected = step(
            &step(&w.reflect_negate(5).unwrap(), &mirrored).unwrap(),
            &mirrored,
        )
        .unwrap();
        assert_eq!(direct.reflect_negate(5).unwrap(), reflected);
    }

    /// The two particle conditions of the local rule are mutually exclusive,
    /// checked against an independent transliteration of the definition.
    #[test]
    fn local_rule_well_defined_exhaustive() {
        for (vm, vp) in [(-1i64, 0i64), (-1, 1), (-2, 1), (-1, 2)] {
            let rule = GlidersRule::new(vm, vp).unwrap();
            let r = rule.radius() as i64;
            let width = (2 * r + 1) as usize;
            let total = 3usize.pow(width as u32);
            for code in 0..total {
                let mut rem = code;
                let mut w = vec![0i8; width];
                for i in (0..width).rev() {
                    w[i] = (rem % 3) as i8 - 1;
                    rem /= 3;
                }
                let at = |t: i64| w[(t + r) as usize] as i64;
                let plus = at(-vp) == 1
                    && (-vp + 1..=-vm)
                        .all(|n| (-vp + 1..=n).map(&at).sum::<i64>() >= 0);
                let minus = at(-vm) == -1
                    && (-vp..=-vm - 1)
                        .all(|n| (n..=-vm - 1).map(&at).sum::<i64>() <= 0);
                assert!(
                    !(plus && minus),
                    "conditions overlap for {:?} on {:?}",
                    (vm, vp),
                    w
                );
                let expect = if plus {
                    1
                } else if minus {
                    -1
                } else {
                    0
                };
                assert_eq!(gliders_local_rule(rule, &w).unwrap(), expect);
            }
        }
    }
}
