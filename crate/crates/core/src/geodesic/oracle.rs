//! Exhaustive reference for the geodesic distance on small instances.
//!
//! Every candidate path is described by an ordering in which groups of
//! source-only splits collapse and groups of target-only splits appear. Each
//! group pair switches at its natural time `|A| / (|A| + |B|)`; orderings
//! whose switch times are not increasing, or whose intermediate split sets
//! are not trees, are discarded. Every surviving ordering is a real path in
//! tree-space. The path is materialized as explicit coordinate vectors at
//! every switch time and on a uniform grid, and its length is the sum of the
//! Euclidean chords between consecutive samples, each of which lies inside
//! a single closed orthant. The minimum over all orderings is an upper bound
//! on the geodesic distance that is attained by the geodesic's own ordering.

use crate::error::{Error, Result};
use crate::tree::{AttributedTree, Split};

/// Largest number of exclusive splits the search accepts.
const MAX_EXCLUSIVE: usize = 12;

struct Search<'a> {
    a: Vec<(&'a Split, &'a [f64])>,
    b: Vec<(&'a Split, &'a [f64])>,
    common: Vec<(&'a [f64], &'a [f64])>,
    /// compat[i][j] over the concatenation a ++ b.
    compat: Vec<Vec<bool>>,
    a_sq: Vec<f64>,
    b_sq: Vec<f64>,
    grid: usize,
    best: f64,
}

impl Search<'_> {
    fn mask_norm(sq: &[f64], mask: u32) -> f64 {
        (0..sq.len())
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| sq[i])
            .sum::<f64>()
            .sqrt()
    }

    fn alive_compatible(&self, a_mask: u32, b_mask: u32) -> bool {
        let na = self.a.len();
        let idx: Vec<usize> = (0..na)
            .filter(|&i| a_mask & (1 << i) != 0)
            .chain((0..self.b.len()).filter(|&j| b_mask & (1 << j) != 0).map(|j| na + j))
            .collect();
        for (x, &i) in idx.iter().enumerate() {
            for &j in &idx[x + 1..] {
                if !self.compat[i][j] {
                    return false;
                }
            }
        }
        true
    }

    fn descend(&mut self, rem_a: u32, placed_b: u32, last_tau: f64, seq: &mut Vec<(u32, u32, f64)>) {
        let all_b = (1u32 << self.b.len()) - 1;
        if rem_a == 0 && placed_b == all_b {
            let len = self.path_length(seq);
            if len < self.best {
                self.best = len;
            }
            return;
        }
        let free_b = all_b & !placed_b;
        let mut sub_a = rem_a;
        loop {
            let mut sub_b = free_b;
            loop {
                if sub_a != 0 || sub_b != 0 {
                    let alpha = Self::mask_norm(&self.a_sq, sub_a);
                    let beta = Self::mask_norm(&self.b_sq, sub_b);
                    let tau = alpha / (alpha + beta);
                    if tau > last_tau + 1e-12
                        && self.alive_compatible(rem_a & !sub_a, placed_b | sub_b)
                    {
                        seq.push((sub_a, sub_b, tau));
                        self.descend(rem_a & !sub_a, placed_b | sub_b, tau, seq);
                        seq.pop();
                    }
                }
                if sub_b == 0 {
                    break;
                }
                sub_b = (sub_b - 1) & free_b;
            }
            if sub_a == 0 {
                break;
            }
            sub_a = (sub_a - 1) & rem_a;
        }
    }

    fn coordinates(&self, seq: &[(u32, u32, f64)], t: f64, out: &mut Vec<f64>) {
        out.clear();
        for (x, y) in &self.common {
            out.extend(x.iter().zip(y.iter()).map(|(p, q)| (1.0 - t) * p + t * q));
        }
        for &(ma, mb, tau) in seq {
            for (i, (_, v)) in self.a.iter().enumerate() {
                if ma & (1 << i) != 0 {
                    let f = if t < tau { 1.0 - t / tau } else { 0.0 };
                    out.extend(v.iter().map(|c| c * f));
                }
            }
            for (j, (_, v)) in self.b.iter().enumerate() {
                if mb & (1 << j) != 0 {
                    let f = if t > tau { (t - tau) / (1.0 - tau) } else { 0.0 };
                    out.extend(v.iter().map(|c| c * f));
                }
            }
        }
    }

    fn path_length(&self, seq: &[(u32, u32, f64)]) -> f64 {
        let mut times: Vec<f64> = (0..=self.grid).map(|i| i as f64 / self.grid as f64).collect();
        times.extend(seq.iter().map(|s| s.2));
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut prev = Vec::new();
        let mut cur = Vec::new();
        self.coordinates(seq, times[0], &mut prev);
        let mut total = 0.0;
        for &t in &times[1..] {
            self.coordinates(seq, t, &mut cur);
            total += prev
                .iter()
                .zip(cur.iter())
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt();
            std::mem::swap(&mut prev, &mut cur);
        }
        total
    }
}

/// Reference geodesic distance by exhaustive search over path orderings.
///
/// `grid` sets the number of uniform samples per path at which the explicit
/// coordinates are evaluated. Intended for small trees only; instances with
/// more than 12 splits exclusive to one tree are refused.
pub fn brute_force_distance(t1: &AttributedTree, t2: &AttributedTree, grid: usize) -> Result<f64> {
    if !t1.same_leaves(t2) {
        return Err(Error::LeafSetMismatch);
    }
    if t1.dim() != t2.dim() {
        return Err(Error::DimensionMismatch(t1.dim(), t2.dim()));
    }
    if grid == 0 {
        return Err(Error::InvalidArgument("grid must be positive".into()));
    }
    let s = t1.without_zero_edges();
    let t = t2.without_zero_edges();
    let a: Vec<(&Split, &[f64])> = s
        .edges()
        .iter()
        .filter(|(sp, _)| t.edge(sp).is_none())
        .map(|(sp, v)| (sp, v.values()))
        .collect();
    let b: Vec<(&Split, &[f64])> = t
        .edges()
        .iter()
        .filter(|(sp, _)| s.edge(sp).is_none())
        .map(|(sp, v)| (sp, v.values()))
        .collect();
    if a.len() + b.len() > MAX_EXCLUSIVE {
        return Err(Error::TooLarge(format!(
            "{} exclusive splits exceed the exhaustive-search limit of {MAX_EXCLUSIVE}",
            a.len() + b.len()
        )));
    }
    let common: Vec<(&[f64], &[f64])> = s
        .edges()
        .iter()
        .filter_map(|(sp, v)| t.edge(sp).map(|w| (v.values(), w.values())))
        .collect();
    let all: Vec<&Split> = a.iter().map(|x| x.0).chain(b.iter().map(|x| x.0)).collect();
    let compat = all
        .iter()
        .map(|x| all.iter().map(|y| x.compatible_with(y)).collect())
        .collect();
    let sq = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>();
    let a_sq = a.iter().map(|x| sq(x.1)).collect();
    let b_sq = b.iter().map(|x| sq(x.1)).collect();
    let mut search = Search {
        a,
        b,
        common,
        compat,
        a_sq,
        b_sq,
        grid,
        best: f64::INFINITY,
    };
    let all_a = (1u32 << search.a.len()) - 1;
    search.descend(all_a, 0, f64::NEG_INFINITY, &mut Vec::new());
    Ok(search.best)
}
