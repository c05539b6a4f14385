//! Sparse-table range-minimum queries.
//!
//! Entry times repeatedly ask for minima of partial-sum walks over nested
//! ranges, so we pay `O(len log len)` once and answer each query with two
//! lookups.

/// Immutable range-minimum structure over a fixed array of i64 values.
pub struct SparseTable {
    len: usize,
    /// Level k holds min over blocks of length 2^k; levels are concatenated.
    levels: Vec<Vec<i64>>,
}

impl SparseTable {
    pub fn new(values: &[i64]) -> SparseTable {
        let len = values.len();
        let mut levels = Vec::new();
        levels.push(values.to_vec());
        let mut size = 1usize;
        while size * 2 <= len {
            let prev = levels.last().expect("at least one level");
            let next: Vec<i64> = (0..len - size * 2 + 1)
                .map(|i| prev[i].min(prev[i + size]))
                .collect();
            levels.push(next);
            size *= 2;
        }
        SparseTable { len, levels }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Minimum of `values[i..=j]`. Panics if `i > j` or `j >= len`.
    #[inline]
    pub fn min(&self, i: usize, j: usize) -> i64 {
        assert!(i <= j && j < self.len, "bad range [{i}, {j}] (len {})", self.len);
        let k = usize::ilog2(j - i + 1) as usize;
        let level = &self.levels[k];
        level[i].min(level[j + 1 - (1 << k)])
    }
}
