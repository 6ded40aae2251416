//! Static range-minimum / range-maximum queries over `f64` arrays.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Extreme {
    Min,
    Max,
}

impl Extreme {
    #[inline]
    fn pick(self, a: f64, b: f64) -> f64 {
        match self {
            Extreme::Min => a.min(b),
            Extreme::Max => a.max(b),
        }
    }
}

/// Sparse table: O(n log n) build, O(1) query on inclusive index ranges.
#[derive(Clone, Debug)]
pub(crate) struct SparseTable {
    kind: Extreme,
    levels: Vec<Vec<f64>>,
}

impl SparseTable {
    pub fn new(values: &[f64], kind: Extreme) -> Self {
        let mut levels = vec![values.to_vec()];
        let mut span = 1;
        while 2 * span <= values.len() {
            let prev = levels.last().unwrap();
            let next: Vec<f64> = (0..=values.len() - 2 * span)
                .map(|i| kind.pick(prev[i], prev[i + span]))
                .collect();
            levels.push(next);
            span *= 2;
        }
        SparseTable { kind, levels }
    }

    /// Extreme over `values[a..=b]`. Requires `a <= b < len`.
    pub fn query(&self, a: usize, b: usize) -> f64 {
        debug_assert!(a <= b && b < self.levels[0].len());
        let len = b - a + 1;
        let k = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let row = &self.levels[k];
        self.kind.pick(row[a], row[b + 1 - (1 << k)])
    }
}
