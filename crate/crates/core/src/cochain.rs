//! Finite cochain complexes over ℚ with integer matrices.

use crate::exact::rank;

/// `dims[d]` is the dimension in degree `d`; `maps[d]` lists the nonzero
/// entries `(target, source, value)` of the differential from degree `d` to `d + 1`.
#[derive(Debug, Clone, Default)]
pub(crate) struct Cochain {
    pub dims: Vec<usize>,
    pub maps: Vec<Vec<(usize, usize, i64)>>,
}

impl Cochain {
    pub fn with_dims(dims: Vec<usize>) -> Self {
        let maps = vec![Vec::new(); dims.len()];
        Cochain { dims, maps }
    }

    pub fn push(&mut self, degree: usize, target: usize, source: usize, value: i64) {
        debug_assert!(source < self.dims[degree] && target < self.dims[degree + 1]);
        self.maps[degree].push((target, source, value));
    }

    fn dense(&self, degree: usize) -> Vec<Vec<i64>> {
        let rows = self.dims.get(degree + 1).copied().unwrap_or(0);
        let mut m = vec![vec![0i64; self.dims[degree]]; rows];
        for &(t, s, v) in &self.maps[degree] {
            m[t][s] += v;
        }
        m
    }

    fn rank_of(&self, degree: usize) -> usize {
        if degree + 1 >= self.dims.len() || self.maps[degree].is_empty() {
            return 0;
        }
        rank(&self.dense(degree))
    }

    /// Dimensions of the cohomology in every degree.
    pub fn cohomology(&self) -> Vec<u64> {
        let ranks: Vec<usize> = (0..self.dims.len()).map(|d| self.rank_of(d)).collect();
        (0..self.dims.len())
            .map(|d| {
                let incoming = if d == 0 { 0 } else { ranks[d - 1] };
                (self.dims[d] - ranks[d] - incoming) as u64
            })
            .collect()
    }

    /// `d ∘ d = 0` in every degree.
    #[cfg(test)]
    pub fn is_complex(&self) -> bool {
        (0..self.dims.len().saturating_sub(2)).all(|d| {
            let a = self.dense(d);
            let b = self.dense(d + 1);
            b.iter().all(|row| {
                (0..self.dims[d]).all(|j| row.iter().enumerate().map(|(k, x)| x * a[k][j]).sum::<i64>() == 0)
            })
        })
    }
}
