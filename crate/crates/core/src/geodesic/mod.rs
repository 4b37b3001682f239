//! Geodesics in tree-space.
//!
//! Splits present in only one of the two trees are partitioned by the
//! incompatibility graph. Splits compatible with everything in the other tree
//! shrink or grow linearly; the rest form connected components, each of which
//! is solved independently by successive refinement of a support sequence:
//! a pair `(A, B)` is split whenever the bipartite incompatibility graph has
//! a vertex cover of normalized weight below one, and the resulting ratio
//! sequence is then merged into ascending order. Components are independent
//! because every split of one component is compatible with every split of
//! another, so the path space is a product and lengths combine in quadrature.

mod flow;
mod oracle;

use std::collections::BTreeMap;

use rayon::prelude::*;

pub use flow::{min_weight_vertex_cover, Cover};
pub use oracle::brute_force_distance;

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;
use crate::tree::{AttributedTree, EdgeAttribute, Split};

/// Absolute tolerance on normalized squared lengths.
const TOL: f64 = 1e-12;

/// One leg of the support: source splits `a` shrink to zero while target
/// splits `b` grow from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPair {
    pub a: Vec<Split>,
    pub b: Vec<Split>,
    a_norm: f64,
    b_norm: f64,
}

impl SupportPair {
    /// Euclidean norm of the concatenated source vectors.
    pub fn a_norm(&self) -> f64 {
        self.a_norm
    }

    pub fn b_norm(&self) -> f64 {
        self.b_norm
    }

    /// Fraction of the path at which the `a` edges vanish and the `b`
    /// edges appear.
    pub fn switch_time(&self) -> f64 {
        let total = self.a_norm + self.b_norm;
        if total == 0.0 {
            0.5
        } else {
            self.a_norm / total
        }
    }

    fn ratio(&self) -> f64 {
        if self.b_norm == 0.0 {
            f64::INFINITY
        } else {
            self.a_norm / self.b_norm
        }
    }

    fn merge(mut self, other: SupportPair) -> SupportPair {
        self.a.extend(other.a);
        self.b.extend(other.b);
        self.a.sort();
        self.b.sort();
        self.a_norm = self.a_norm.hypot(other.a_norm);
        self.b_norm = self.b_norm.hypot(other.b_norm);
        self
    }
}

/// The geodesic between two trees.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    source: AttributedTree,
    target: AttributedTree,
    common: Vec<Split>,
    source_free: Vec<Split>,
    target_free: Vec<Split>,
    components: Vec<Vec<SupportPair>>,
    length: f64,
}

fn check_pair(t1: &AttributedTree, t2: &AttributedTree) -> Result<()> {
    if !t1.same_leaves(t2) {
        return Err(Error::LeafSetMismatch);
    }
    if t1.dim() != t2.dim() {
        return Err(Error::DimensionMismatch(t1.dim(), t2.dim()));
    }
    Ok(())
}

impl GeodesicPath {
    pub fn new(t1: &AttributedTree, t2: &AttributedTree) -> Result<Self> {
        check_pair(t1, t2)?;
        let s = t1.without_zero_edges();
        let t = t2.without_zero_edges();

        let mut common = Vec::new();
        let mut only_s = Vec::new();
        for split in s.splits() {
            if t.edge(split).is_some() {
                common.push(split.clone());
            } else {
                only_s.push(split.clone());
            }
        }
        let only_t: Vec<Split> = t
            .splits()
            .filter(|sp| s.edge(sp).is_none())
            .cloned()
            .collect();

        // Incompatibility graph between the two exclusive split sets.
        let mut incompat: Vec<(usize, usize)> = Vec::new();
        for (i, a) in only_s.iter().enumerate() {
            for (j, b) in only_t.iter().enumerate() {
                if !a.compatible_with(b) {
                    incompat.push((i, j));
                }
            }
        }
        let na = only_s.len();
        let mut uf = UnionFind::new(na + only_t.len());
        for &(i, j) in &incompat {
            uf.union(i, na + j);
        }
        let mut has_edge = vec![false; na + only_t.len()];
        for &(i, j) in &incompat {
            has_edge[i] = true;
            has_edge[na + j] = true;
        }

        let source_free: Vec<Split> = (0..na)
            .filter(|&i| !has_edge[i])
            .map(|i| only_s[i].clone())
            .collect();
        let target_free: Vec<Split> = (0..only_t.len())
            .filter(|&j| !has_edge[na + j])
            .map(|j| only_t[j].clone())
            .collect();

        // Group the remaining splits by component, keyed by the smallest
        // member index so the component order is deterministic.
        let mut groups: BTreeMap<usize, (Vec<Split>, Vec<Split>)> = BTreeMap::new();
        for i in (0..na).filter(|&i| has_edge[i]) {
            groups.entry(uf.find(i)).or_default().0.push(only_s[i].clone());
        }
        for j in (0..only_t.len()).filter(|&j| has_edge[na + j]) {
            groups
                .entry(uf.find(na + j))
                .or_default()
                .1
                .push(only_t[j].clone());
        }

        let components: Vec<Vec<SupportPair>> = groups
            .into_values()
            .map(|(a, b)| solve_component(&s, &t, a, b))
            .collect();

        let mut sq = 0.0;
        for split in &common {
            sq += s.edge(split).unwrap().dist_sq(t.edge(split).unwrap());
        }
        for split in &source_free {
            sq += s.edge(split).unwrap().norm_sq();
        }
        for split in &target_free {
            sq += t.edge(split).unwrap().norm_sq();
        }
        for comp in &components {
            for pair in comp {
                let l = pair.a_norm + pair.b_norm;
                sq += l * l;
            }
        }

        Ok(GeodesicPath {
            source: t1.clone(),
            target: t2.clone(),
            common,
            source_free,
            target_free,
            components,
            length: sq.sqrt(),
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn source(&self) -> &AttributedTree {
        &self.source
    }

    pub fn target(&self) -> &AttributedTree {
        &self.target
    }

    /// Splits present in both endpoints.
    pub fn common_edges(&self) -> &[Split] {
        &self.common
    }

    /// Per-component support sequences, each in ascending ratio order.
    pub fn components(&self) -> &[Vec<SupportPair>] {
        &self.components
    }

    /// The full support as one sequence. Splits that are exclusive to one
    /// endpoint but compatible with every split of the other appear as
    /// one-sided pairs at the ends.
    pub fn support(&self) -> Vec<SupportPair> {
        let mut pairs: Vec<SupportPair> = self.components.iter().flatten().cloned().collect();
        if !self.target_free.is_empty() {
            pairs.push(SupportPair {
                a: Vec::new(),
                b: self.target_free.clone(),
                a_norm: 0.0,
                b_norm: norm_of(&self.target_free, &self.target),
            });
        }
        if !self.source_free.is_empty() {
            pairs.push(SupportPair {
                a: self.source_free.clone(),
                b: Vec::new(),
                a_norm: norm_of(&self.source_free, &self.source),
                b_norm: 0.0,
            });
        }
        pairs.sort_by(|x, y| x.ratio().total_cmp(&y.ratio()));
        pairs
    }

    /// The point at arc-length fraction `s` along the geodesic.
    pub fn point(&self, s: f64) -> Result<AttributedTree> {
        if !(0.0..=1.0).contains(&s) || s.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "geodesic parameter {s} outside [0, 1]"
            )));
        }
        if s == 0.0 {
            return Ok(self.source.clone());
        }
        if s == 1.0 {
            return Ok(self.target.clone());
        }
        let src = &self.source;
        let tgt = &self.target;
        let mut edges: BTreeMap<Split, EdgeAttribute> = BTreeMap::new();
        for split in &self.common {
            let a = src.edge(split).unwrap();
            let b = tgt.edge(split).unwrap();
            edges.insert(split.clone(), a.lerp(b, s));
        }
        for split in &self.source_free {
            edges.insert(split.clone(), src.edge(split).unwrap().scaled(1.0 - s));
        }
        for split in &self.target_free {
            edges.insert(split.clone(), tgt.edge(split).unwrap().scaled(s));
        }
        for pair in self.components.iter().flatten() {
            let (alpha, beta) = (pair.a_norm, pair.b_norm);
            let before = (1.0 - s) * alpha - s * beta;
            if before > 0.0 {
                let f = before / alpha;
                for split in &pair.a {
                    edges.insert(split.clone(), src.edge(split).unwrap().scaled(f));
                }
            } else if before < 0.0 {
                let f = -before / beta;
                for split in &pair.b {
                    edges.insert(split.clone(), tgt.edge(split).unwrap().scaled(f));
                }
            }
        }
        edges.retain(|_, a| !a.is_zero());
        let labels = src
            .labels()
            .iter()
            .filter(|(name, split)| {
                tgt.label_split(name) == Some(split) && edges.contains_key(*split)
            })
            .map(|(n, s)| (n.clone(), s.clone()))
            .collect();
        Ok(AttributedTree::from_parts_unchecked(
            src.leaves().clone(),
            src.dim(),
            edges,
            labels,
        ))
    }
}

fn norm_of(splits: &[Split], tree: &AttributedTree) -> f64 {
    splits
        .iter()
        .map(|s| tree.edge(s).unwrap().norm_sq())
        .sum::<f64>()
        .sqrt()
}

fn make_pair(a: Vec<Split>, b: Vec<Split>, s: &AttributedTree, t: &AttributedTree) -> SupportPair {
    let a_norm = norm_of(&a, s);
    let b_norm = norm_of(&b, t);
    SupportPair {
        a,
        b,
        a_norm,
        b_norm,
    }
}

fn solve_component(
    s: &AttributedTree,
    t: &AttributedTree,
    a: Vec<Split>,
    b: Vec<Split>,
) -> Vec<SupportPair> {
    let mut pairs = Vec::new();
    refine(make_pair(a, b, s, t), s, t, &mut pairs);
    loop {
        let merged = merge_ascending(pairs);
        // Merging may create pairs that admit a further split.
        let mut next = Vec::with_capacity(merged.len());
        for p in &merged {
            refine(p.clone(), s, t, &mut next);
        }
        if next.len() == merged.len() {
            return merged;
        }
        let before = support_len_sq(&merged);
        let candidate = merge_ascending(next.clone());
        if support_len_sq(&candidate) >= before - TOL {
            return merged;
        }
        pairs = next;
    }
}

fn support_len_sq(pairs: &[SupportPair]) -> f64 {
    pairs
        .iter()
        .map(|p| (p.a_norm + p.b_norm).powi(2))
        .sum()
}

/// Splits `pair` recursively until no leg can be shortened, appending the
/// resulting legs in path order.
fn refine(pair: SupportPair, s: &AttributedTree, t: &AttributedTree, out: &mut Vec<SupportPair>) {
    if pair.a.is_empty() || pair.b.is_empty() {
        out.push(pair);
        return;
    }
    let a_sq = pair.a_norm * pair.a_norm;
    let b_sq = pair.b_norm * pair.b_norm;
    let lw: Vec<f64> = pair
        .a
        .iter()
        .map(|x| s.edge(x).unwrap().norm_sq() / a_sq)
        .collect();
    let rw: Vec<f64> = pair
        .b
        .iter()
        .map(|x| t.edge(x).unwrap().norm_sq() / b_sq)
        .collect();
    let mut edges = Vec::new();
    for (i, x) in pair.a.iter().enumerate() {
        for (j, y) in pair.b.iter().enumerate() {
            if !x.compatible_with(y) {
                edges.push((i, j));
            }
        }
    }
    let cover = min_weight_vertex_cover(&lw, &rw, &edges);
    if cover.weight >= 1.0 - TOL {
        out.push(pair);
        return;
    }
    // The cover's source splits drop first; the uncovered source splits and
    // uncovered target splits coexist in the intermediate orthant.
    let (mut a1, mut a2) = (Vec::new(), Vec::new());
    for (i, x) in pair.a.into_iter().enumerate() {
        if cover.left.contains(&i) {
            a1.push(x);
        } else {
            a2.push(x);
        }
    }
    let (mut b1, mut b2) = (Vec::new(), Vec::new());
    for (j, y) in pair.b.into_iter().enumerate() {
        if cover.right.contains(&j) {
            b2.push(y);
        } else {
            b1.push(y);
        }
    }
    refine(make_pair(a1, b1, s, t), s, t, out);
    refine(make_pair(a2, b2, s, t), s, t, out);
}

/// Pools adjacent pairs whose ratios are out of order until the sequence is
/// non-decreasing in `|A| / |B|`.
fn merge_ascending(pairs: Vec<SupportPair>) -> Vec<SupportPair> {
    let mut stack: Vec<SupportPair> = Vec::with_capacity(pairs.len());
    for p in pairs {
        let mut cur = p;
        while let Some(top) = stack.last() {
            if top.ratio() > cur.ratio() {
                let top = stack.pop().unwrap();
                cur = top.merge(cur);
            } else {
                break;
            }
        }
        stack.push(cur);
    }
    stack
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut x = x;
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller index becomes the root.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Geodesic distance between two trees.
pub fn geodesic_distance(t1: &AttributedTree, t2: &AttributedTree) -> Result<f64> {
    Ok(GeodesicPath::new(t1, t2)?.length())
}

/// The tree at arc-length fraction `s` along the geodesic from `t1` to `t2`.
pub fn geodesic_point(t1: &AttributedTree, t2: &AttributedTree, s: f64) -> Result<AttributedTree> {
    if !(0.0..=1.0).contains(&s) || s.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "geodesic parameter {s} outside [0, 1]"
        )));
    }
    GeodesicPath::new(t1, t2)?.point(s)
}

/// All pairwise geodesic distances. Each entry is computed independently, so
/// the result does not depend on the thread schedule.
pub fn distance_matrix(trees: &[AttributedTree]) -> Result<DistanceMatrix> {
    let n = trees.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| geodesic_distance(&trees[i], &trees[j]))
        .collect::<Result<_>>()?;
    let mut m = vec![0.0; n * n];
    for (&(i, j), &d) in pairs.iter().zip(values.iter()) {
        m[i * n + j] = d;
        m[j * n + i] = d;
    }
    let ids = (0..n).map(|i| i.to_string()).collect();
    DistanceMatrix::new(ids, None, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::parse_tree;

    fn quartet(first: [&str; 2], second: [&str; 2], len: f64) -> AttributedTree {
        let doc = format!(
            r#"{{"leaves":["a","b","c","d"],"edges":[
                {{"split":["a"],"attr":[1.0]}},{{"split":["b"],"attr":[1.0]}},
                {{"split":["c"],"attr":[1.0]}},{{"split":["d"],"attr":[1.0]}},
                {{"split":["{}","{}"],"attr":[{len}]}},{{"split":["{}","{}"],"attr":[{len}]}}]}}"#,
            first[0], first[1], second[0], second[1]
        );
        parse_tree(&doc).unwrap()
    }

    #[test]
    fn identical_trees_are_at_distance_zero() {
        let t = quartet(["a", "b"], ["c", "d"], 1.0);
        assert_eq!(geodesic_distance(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn same_topology_is_euclidean() {
        let t1 = parse_tree(
            r#"{"leaves":["a","b"],"edges":[{"split":["a"],"attr":[1.0]},{"split":["b"],"attr":[2.0]},{"split":["a","b"],"attr":[3.0]}]}"#,
        )
        .unwrap();
        let t2 = parse_tree(
            r#"{"leaves":["a","b"],"edges":[{"split":["a"],"attr":[2.0]},{"split":["b"],"attr":[2.0]},{"split":["a","b"],"attr":[4.0]}]}"#,
        )
        .unwrap();
        let d = geodesic_distance(&t1, &t2).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        let mid = geodesic_point(&t1, &t2, 0.5).unwrap();
        let vals: Vec<f64> = mid.edges().values().map(|a| a.values()[0]).collect();
        assert_eq!(vals, vec![1.5, 3.5, 2.0]);
    }

    #[test]
    fn cone_path_between_incompatible_quartets() {
        let t1 = quartet(["a", "b"], ["c", "d"], 1.0);
        let t2 = quartet(["a", "c"], ["b", "d"], 1.0);
        let d = geodesic_distance(&t1, &t2).unwrap();
        assert!((d - 2.0 * 2f64.sqrt()).abs() < 1e-12, "{d}");

        let mid = geodesic_point(&t1, &t2, 0.5).unwrap();
        assert_eq!(mid.num_edges(), 4);
        assert!(mid.splits().all(Split::is_pendant));
    }

    #[test]
    fn endpoints_are_returned_exactly() {
        let t1 = quartet(["a", "b"], ["c", "d"], 0.7);
        let t2 = quartet(["a", "c"], ["b", "d"], 1.3);
        assert_eq!(geodesic_point(&t1, &t2, 0.0).unwrap(), t1);
        assert_eq!(geodesic_point(&t1, &t2, 1.0).unwrap(), t2);
        assert!(geodesic_point(&t1, &t2, 1.5).is_err());
        assert!(geodesic_point(&t1, &t2, -0.1).is_err());
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let t1 = quartet(["a", "b"], ["c", "d"], 1.0);
        let other = parse_tree(r#"{"leaves":["a"],"edges":[{"split":["a"],"attr":[1.0]}]}"#).unwrap();
        assert!(matches!(geodesic_distance(&t1, &other), Err(Error::LeafSetMismatch)));
        let k2 = parse_tree(
            r#"{"leaves":["a","b","c","d"],"edges":[{"split":["a"],"attr":[1.0,0.0]}]}"#,
        )
        .unwrap();
        assert!(matches!(
            geodesic_distance(&t1, &k2),
            Err(Error::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn distance_matrix_small_cases() {
        let t = quartet(["a", "b"], ["c", "d"], 1.0);
        let m = distance_matrix(std::slice::from_ref(&t)).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.get(0, 0), 0.0);
        let u = quartet(["a", "c"], ["b", "d"], 1.0);
        let m = distance_matrix(&[t.clone(), u, t]).unwrap();
        assert_eq!(m.get(0, 2), 0.0);
        assert!(m.get(0, 1) > 0.0);
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    #[test]
    fn pav_merges_descending_ratios() {
        let ls = std::sync::Arc::new(crate::tree::LeafSet::new(["a", "b"]).unwrap());
        let sp = |v: &[&str]| ls.split(v).unwrap();
        let p = |a: f64, b: f64| SupportPair {
            a: vec![sp(&["a"])],
            b: vec![sp(&["b"])],
            a_norm: a,
            b_norm: b,
        };
        let merged = merge_ascending(vec![p(3.0, 1.0), p(1.0, 1.0), p(5.0, 1.0)]);
        assert_eq!(merged.len(), 2);
        assert!((merged[0].a_norm - 10f64.sqrt()).abs() < 1e-15);
        assert!(merged[0].ratio() <= merged[1].ratio());
    }
}
