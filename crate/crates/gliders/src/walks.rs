//! Partial-sum walks of signed configurations and the particle oracle.
//!
//! A three-state window `a` determines the walk `M` with `M(0) = 0` and
//! `M(k+1) - M(k) = a_k`. Whether a particle sits at cell `j` after `k`
//! steps of a `(v-, v+)` rule is a pair of strict-minimum comparisons on
//! `M`, so one walk plus a range-minimum table answers particle queries for
//! every time step at once.

use crate::ca::{ConfigurationWindow, GlidersRule, SIGNED_ALPHABET};
use crate::error::{Error, Result};
use crate::rmq::SparseTable;

/// A walk `M` on a contiguous integer domain, with O(1) range minima.
pub struct WalkPath {
    lo: i64,
    values: Vec<i64>,
    rmq: SparseTable,
}

impl WalkPath {
    /// Wrap explicit walk values; `values[0]` is `M(lo)`.
    ///
    /// The domain must contain 0 with `M(0) = 0`, and consecutive values
    /// may differ by at most 1 (walks of three-state configurations).
    pub fn from_values(lo: i64, values: Vec<i64>) -> Result<WalkPath> {
        if values.is_empty() {
            return Err(Error::EmptyWindow);
        }
        let hi = lo + values.len() as i64 - 1;
        if lo > 0 || hi < 0 {
            return Err(Error::WalkMissingOrigin { lo, hi });
        }
        let anchor = values[(-lo) as usize];
        if anchor != 0 {
            return Err(Error::WalkNotAnchored { value: anchor });
        }
        for (i, pair) in values.windows(2).enumerate() {
            let inc = pair[1] - pair[0];
            if !(-1..=1).contains(&inc) {
                return Err(Error::WalkIncrementOutOfRange {
                    index: lo + i as i64,
                    increment: inc,
                });
            }
        }
        let rmq = SparseTable::new(&values);
        Ok(WalkPath { lo, values, rmq })
    }

    /// First index of the domain.
    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// Last index of the domain.
    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor rejects empty walks
    }

    /// `M(k)`; panics outside the domain.
    #[inline]
    pub fn value(&self, k: i64) -> i64 {
        assert!(
            k >= self.lo && k <= self.hi(),
            "walk index {k} outside [{}, {}]",
            self.lo,
            self.hi()
        );
        self.values[(k - self.lo) as usize]
    }

    /// `M(k)` if `k` lies in the domain.
    pub fn get(&self, k: i64) -> Option<i64> {
        if k < self.lo || k > self.hi() {
            return None;
        }
        Some(self.values[(k - self.lo) as usize])
    }

    /// `min { M(t) : a <= t <= b }`; panics on an empty or escaping range.
    #[inline]
    pub fn min_in(&self, a: i64, b: i64) -> i64 {
        assert!(
            a <= b && a >= self.lo && b <= self.hi(),
            "walk range [{a}, {b}] outside [{}, {}]",
            self.lo,
            self.hi()
        );
        self.rmq.min((a - self.lo) as usize, (b - self.lo) as usize)
    }

    /// Check that `[need_lo, need_hi]` lies inside the domain.
    pub fn require_range(&self, need_lo: i64, need_hi: i64) -> Result<()> {
        if need_lo < self.lo || need_hi > self.hi() {
            return Err(Error::WalkDomainTooSmall {
                lo: self.lo,
                hi: self.hi(),
                need_lo,
                need_hi,
            });
        }
        Ok(())
    }

    /// The reversed, re-anchored walk `M'(k) = M(pivot - k) - M(pivot)`.
    ///
    /// This is the walk of the species-swapped configuration (reflect and
    /// negate); its domain is `[pivot - hi, pivot - lo]`.
    pub fn mirrored(&self, pivot: i64) -> Result<WalkPath> {
        self.require_range(pivot, pivot)?;
        let at_pivot = self.value(pivot);
        let values: Vec<i64> = self.values.iter().rev().map(|&v| v - at_pivot).collect();
        WalkPath::from_values(pivot - self.hi(), values)
    }
}

impl std::fmt::Debug for WalkPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WalkPath")
            .field("lo", &self.lo)
            .field("hi", &self.hi())
            .finish()
    }
}

/// Partial-sum walk of a three-state window.
///
/// For a window on `[lo, hi]` the walk is defined on `[lo, hi + 1]`, which
/// must contain 0.
pub fn partial_sums(config: &ConfigurationWindow) -> Result<WalkPath> {
    if config.alphabet_size() != SIGNED_ALPHABET {
        return Err(Error::AlphabetMismatch {
            rule_alphabet: SIGNED_ALPHABET,
            window_alphabet: config.alphabet_size(),
        });
    }
    let lo = config.lo();
    let hi_walk = config.hi() + 1;
    if lo > 0 || hi_walk < 0 {
        return Err(Error::WalkMissingOrigin { lo, hi: hi_walk });
    }
    // accumulate left to right, then shift so that M(0) = 0
    let mut values = Vec::with_capacity(config.len() + 1);
    let mut sum = 0i64;
    values.push(0);
    for &c in config.cells() {
        sum += c as i64 - 1;
        values.push(sum);
    }
    let anchor = values[(-lo) as usize];
    if anchor != 0 {
        for v in &mut values {
            *v -= anchor;
        }
    }
    WalkPath::from_values(lo, values)
}

/// State of cell `j` after `k` steps of `rule`, read off the walk.
///
/// A `-1` occupies `(j, k)` iff `M(j - v-*k + 1)` is a strict minimum over
/// `[j - v+*k, j - v-*k]`; a `+1` iff `M(j - v+*k)` is a strict minimum
/// over `[j - v+*k + 1, j - v-*k + 1]`. Ties mean no particle.
pub fn particle_at(walk: &WalkPath, j: i64, k: u64, rule: GlidersRule) -> Result<i8> {
    let k = i64::try_from(k).map_err(|_| Error::arg("time step too large"))?;
    let left = j - rule.v_plus() * k;
    let right = j - rule.v_minus() * k;
    walk.require_range(left, right + 1)?;
    if walk.value(right + 1) < walk.min_in(left, right) {
        return Ok(-1);
    }
    if walk.value(left) < walk.min_in(left + 1, right + 1) {
        return Ok(1);
    }
    Ok(0)
}

/// Diffusively rescaled walk: `S(t) = M(nt) / sqrt(n)`, linearly
/// interpolated between integer points of `M`.
pub fn rescaled_walk(walk: &WalkPath, n: u64, t: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::arg("rescaling level n must be positive"));
    }
    if !t.is_finite() {
        return Err(Error::arg("rescaled time must be finite"));
    }
    let u = t * n as f64;
    let scale = (n as f64).sqrt();
    let floor = u.floor();
    let frac = u - floor;
    let base = floor as i64;
    if frac == 0.0 {
        // exactly on a lattice point; avoids requiring M(base + 1)
        walk.require_range(base, base)?;
        return Ok(walk.value(base) as f64 / scale);
    }
    walk.require_range(base, base + 1)?;
    let m0 = walk.value(base) as f64;
    let m1 = walk.value(base + 1) as f64;
    Ok((m0 + frac * (m1 - m0)) / scale)
}
