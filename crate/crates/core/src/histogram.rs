use serde::{Deserialize, Serialize};

/// Fixed-width histogram: `edges` has `counts.len() + 1` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Bins `values` into `bins` equal-width bins over `[lo, hi]`. Values on
    /// the upper edge land in the last bin.
    pub fn with_range(values: &[f64], bins: usize, lo: f64, hi: f64) -> Histogram {
        let bins = bins.max(1);
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let b = if width > 0.0 {
                (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1)
            } else {
                0
            };
            counts[b] += 1;
        }
        Histogram { edges, counts }
    }

    /// Bins over the data range, padded to a unit interval when all values
    /// coincide.
    pub fn new(values: &[f64], bins: usize) -> Histogram {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() || !hi.is_finite() {
            return Histogram::with_range(values, bins, 0.0, 1.0);
        }
        if lo == hi {
            return Histogram::with_range(values, bins, lo - 0.5, hi + 0.5);
        }
        Histogram::with_range(values, bins, lo, hi)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Index of the bin containing `v`, if it lies within the edges.
    pub fn bin_of(&self, v: f64) -> Option<usize> {
        let bins = self.counts.len();
        if v < self.edges[0] || v > self.edges[bins] {
            return None;
        }
        (0..bins).find(|&b| v < self.edges[b + 1]).or(Some(bins - 1))
    }
}
