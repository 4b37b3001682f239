//! Attributed trees as points of tree-space.
//!
//! A tree over a fixed leaf set is stored as a map from splits (the set of
//! leaves below an edge) to the edge's attribute vector. Topology is implied
//! by the split set: a collection of pairwise compatible splits determines a
//! unique rooted tree.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The fixed, ordered set of leaf labels shared by all trees in a population.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LeafSet {
    names: Vec<String>,
}

impl LeafSet {
    /// Builds a leaf set, sorting the names into canonical order.
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidTree("leaf set is empty".into()));
        }
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidTree(format!("duplicate leaf name {:?}", w[0])));
        }
        Ok(LeafSet { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    /// Builds a split from leaf names.
    pub fn split<I, S>(&self, names: I) -> Result<Split>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut idx = Vec::new();
        for name in names {
            let name = name.as_ref();
            let i = self
                .index_of(name)
                .ok_or_else(|| Error::InvalidTree(format!("unknown leaf {name:?}")))?;
            idx.push(i);
        }
        if idx.is_empty() {
            return Err(Error::InvalidTree("empty split".into()));
        }
        Ok(Split::from_indices(self.len(), idx))
    }

    pub fn split_names<'a>(&'a self, split: &'a Split) -> impl Iterator<Item = &'a str> + 'a {
        split.indices().map(move |i| self.names[i].as_str())
    }

    pub fn format_split(&self, split: &Split) -> String {
        let names: Vec<&str> = self.split_names(split).collect();
        format!("{{{}}}", names.join(","))
    }
}

/// A set of leaves, stored as a bitset over leaf indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Split {
    n: usize,
    bits: Box<[u64]>,
}

impl Split {
    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, indices: I) -> Self {
        let mut bits = vec![0u64; n.div_ceil(64)].into_boxed_slice();
        for i in indices {
            assert!(i < n, "leaf index {i} out of range for {n} leaves");
            bits[i / 64] |= 1 << (i % 64);
        }
        Split { n, bits }
    }

    /// The split containing every leaf (the root edge).
    pub fn full(n: usize) -> Self {
        Split::from_indices(n, 0..n)
    }

    /// Number of leaves in the ambient leaf set.
    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn is_pendant(&self) -> bool {
        self.len() == 1
    }

    pub fn contains(&self, leaf: usize) -> bool {
        leaf < self.n && self.bits[leaf / 64] & (1 << (leaf % 64)) != 0
    }

    pub fn is_subset(&self, other: &Split) -> bool {
        self.bits.iter().zip(other.bits.iter()).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Split) -> bool {
        self.bits.iter().zip(other.bits.iter()).all(|(a, b)| a & b == 0)
    }

    /// Two splits are compatible when one contains the other or they are disjoint.
    pub fn compatible_with(&self, other: &Split) -> bool {
        self.is_subset(other) || other.is_subset(self) || self.is_disjoint(other)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + bit)
            })
        })
    }

    pub fn union(&self, other: &Split) -> Split {
        let bits = self.bits.iter().zip(other.bits.iter()).map(|(a, b)| a | b).collect();
        Split { n: self.n, bits }
    }
}

impl Ord for Split {
    /// Lexicographic order of the sorted leaf-index lists. Since leaf indices
    /// follow name order, this matches lexicographic order of the name lists.
    fn cmp(&self, other: &Self) -> Ordering {
        self.indices()
            .cmp(other.indices())
            .then_with(|| self.n.cmp(&other.n))
    }
}

impl PartialOrd for Split {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Tests compatibility of two splits over the same leaf set.
pub fn compatible(s1: &Split, s2: &Split) -> Result<bool> {
    if s1.universe() != s2.universe() {
        return Err(Error::LeafSetMismatch);
    }
    Ok(s1.compatible_with(s2))
}

/// The k-dimensional vector carried by an edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeAttribute(Vec<f64>);

impl EdgeAttribute {
    pub fn new(values: Vec<f64>) -> Self {
        EdgeAttribute(values)
    }

    pub fn length(len: f64) -> Self {
        EdgeAttribute(vec![len])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> EdgeAttribute {
        EdgeAttribute(self.0.iter().map(|v| v * c).collect())
    }

    pub fn dist_sq(&self, other: &EdgeAttribute) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// `(1 - s) * self + s * other`.
    pub fn lerp(&self, other: &EdgeAttribute, s: f64) -> EdgeAttribute {
        EdgeAttribute(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| (1.0 - s) * a + s * b)
                .collect(),
        )
    }
}

/// A rooted tree with labelled leaves and a vector attribute on every edge.
#[derive(Debug, Clone)]
pub struct AttributedTree {
    leaves: Arc<LeafSet>,
    dim: usize,
    edges: BTreeMap<Split, EdgeAttribute>,
    labels: BTreeMap<String, Split>,
}

impl PartialEq for AttributedTree {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.leaves, &other.leaves) || self.leaves == other.leaves)
            && self.dim == other.dim
            && self.edges == other.edges
            && self.labels == other.labels
    }
}

impl AttributedTree {
    /// Builds and validates a tree.
    pub fn new(
        leaves: Arc<LeafSet>,
        dim: usize,
        edges: impl IntoIterator<Item = (Split, EdgeAttribute)>,
        labels: impl IntoIterator<Item = (String, Split)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidTree("attribute dimension must be positive".into()));
        }
        let n = leaves.len();
        let mut map = BTreeMap::new();
        for (split, attr) in edges {
            if split.universe() != n {
                return Err(Error::LeafSetMismatch);
            }
            if split.is_empty() {
                return Err(Error::InvalidTree("empty split".into()));
            }
            if attr.dim() != dim {
                return Err(Error::DimensionMismatch(dim, attr.dim()));
            }
            if attr.values().iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidTree(format!(
                    "non-finite attribute on {}",
                    leaves.format_split(&split)
                )));
            }
            if dim == 1 && attr.values()[0] < 0.0 {
                return Err(Error::InvalidTree(format!(
                    "negative edge length on {}",
                    leaves.format_split(&split)
                )));
            }
            if map.contains_key(&split) {
                return Err(Error::InvalidTree(format!(
                    "duplicate split {}",
                    leaves.format_split(&split)
                )));
            }
            map.insert(split, attr);
        }
        let splits: Vec<&Split> = map.keys().collect();
        for (i, a) in splits.iter().enumerate() {
            for b in &splits[i + 1..] {
                if !a.compatible_with(b) {
                    return Err(Error::IncompatibleSplits(
                        leaves.format_split(a),
                        leaves.format_split(b),
                    ));
                }
            }
        }
        let labels: BTreeMap<String, Split> = labels.into_iter().collect();
        for (name, split) in &labels {
            if !map.contains_key(split) {
                return Err(Error::InvalidTree(format!(
                    "label {name:?} refers to split {} which is not an edge",
                    leaves.format_split(split)
                )));
            }
        }
        Ok(AttributedTree {
            leaves,
            dim,
            edges: map,
            labels,
        })
    }

    /// Builds a tree from already-validated parts. Callers guarantee the
    /// invariants of [`AttributedTree::new`].
    pub(crate) fn from_parts_unchecked(
        leaves: Arc<LeafSet>,
        dim: usize,
        edges: BTreeMap<Split, EdgeAttribute>,
        labels: BTreeMap<String, Split>,
    ) -> Self {
        debug_assert!(edges.keys().all(|s| s.universe() == leaves.len()));
        AttributedTree {
            leaves,
            dim,
            edges,
            labels,
        }
    }

    pub fn leaves(&self) -> &Arc<LeafSet> {
        &self.leaves
    }

    /// Attribute dimension k.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of edges m.
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &BTreeMap<Split, EdgeAttribute> {
        &self.edges
    }

    pub fn edge(&self, split: &Split) -> Option<&EdgeAttribute> {
        self.edges.get(split)
    }

    pub fn labels(&self) -> &BTreeMap<String, Split> {
        &self.labels
    }

    pub fn label_split(&self, name: &str) -> Option<&Split> {
        self.labels.get(name)
    }

    pub fn same_leaves(&self, other: &AttributedTree) -> bool {
        Arc::ptr_eq(&self.leaves, &other.leaves) || self.leaves == other.leaves
    }

    /// All splits of the tree, pendant and interior, in canonical order.
    pub fn splits(&self) -> impl Iterator<Item = &Split> {
        self.edges.keys()
    }

    /// The tree with every attribute multiplied by `c` (c ≥ 0 for k = 1).
    pub fn scaled(&self, c: f64) -> AttributedTree {
        let edges = self
            .edges
            .iter()
            .map(|(s, a)| (s.clone(), a.scaled(c)))
            .collect();
        AttributedTree::from_parts_unchecked(self.leaves.clone(), self.dim, edges, self.labels.clone())
    }

    /// Drops edges whose attribute is the zero vector. Such edges are
    /// collapsed and do not change the point of tree-space.
    pub fn without_zero_edges(&self) -> AttributedTree {
        let edges: BTreeMap<_, _> = self
            .edges
            .iter()
            .filter(|(_, a)| !a.is_zero())
            .map(|(s, a)| (s.clone(), a.clone()))
            .collect();
        let labels = self
            .labels
            .iter()
            .filter(|(_, s)| edges.contains_key(*s))
            .map(|(n, s)| (n.clone(), s.clone()))
            .collect();
        AttributedTree::from_parts_unchecked(self.leaves.clone(), self.dim, edges, labels)
    }

    /// Replaces the label map; every label must name an existing edge.
    pub fn with_labels(&self, labels: BTreeMap<String, Split>) -> Result<AttributedTree> {
        AttributedTree::new(
            self.leaves.clone(),
            self.dim,
            self.edges.clone(),
            labels,
        )
    }
}

// ---------------------------------------------------------------------------
// JSON documents

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    split: Vec<String>,
    attr: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TreeDoc {
    leaves: Vec<String>,
    edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    labels: BTreeMap<String, Vec<String>>,
    /// Only needed when `edges` is empty and k cannot be inferred.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

/// One member of a population file.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationMember {
    pub id: Option<String>,
    pub class: Option<String>,
    pub tree: AttributedTree,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MemberDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class: Option<String>,
    #[serde(flatten)]
    tree: TreeDoc,
}

impl TreeDoc {
    fn into_tree(self, shared: Option<&Arc<LeafSet>>) -> Result<AttributedTree> {
        let leaves = LeafSet::new(self.leaves)?;
        let leaves = match shared {
            Some(s) if **s == leaves => s.clone(),
            _ => Arc::new(leaves),
        };
        let dim = match (self.edges.first(), self.dim) {
            (Some(e), Some(d)) if e.attr.len() != d => {
                return Err(Error::DimensionMismatch(d, e.attr.len()))
            }
            (Some(e), _) => e.attr.len(),
            (None, Some(d)) => d,
            (None, None) => 1,
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in self.edges {
            let split = leaves.split(&e.split)?;
            edges.push((split, EdgeAttribute::new(e.attr)));
        }
        let mut labels = Vec::with_capacity(self.labels.len());
        for (name, members) in self.labels {
            let split = leaves.split(&members)?;
            labels.push((name, split));
        }
        AttributedTree::new(leaves, dim, edges, labels)
    }

    fn from_tree(tree: &AttributedTree) -> TreeDoc {
        let leaves = tree.leaves();
        let names = |s: &Split| -> Vec<String> {
            leaves.split_names(s).map(str::to_owned).collect()
        };
        TreeDoc {
            leaves: leaves.names().to_vec(),
            edges: tree
                .edges()
                .iter()
                .map(|(s, a)| EdgeDoc {
                    split: names(s),
                    attr: a.values().to_vec(),
                })
                .collect(),
            labels: tree
                .labels()
                .iter()
                .map(|(n, s)| (n.clone(), names(s)))
                .collect(),
            dim: tree.edges().is_empty().then_some(tree.dim()),
        }
    }
}

/// Parses a tree JSON document.
pub fn parse_tree(text: &str) -> Result<AttributedTree> {
    let doc: TreeDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.into_tree(None)
}

/// Serializes a tree as canonical JSON: sorted leaves, edges in split order.
pub fn serialize_tree(tree: &AttributedTree) -> String {
    serde_json::to_string(&TreeDoc::from_tree(tree)).expect("tree documents always serialize")
}

/// Returns every split of the tree, pendant and interior.
pub fn splits_of(tree: &AttributedTree) -> Vec<Split> {
    tree.splits().cloned().collect()
}

/// Parses a population file (a JSON array of tree documents). All members
/// must share one leaf set, which is stored once.
pub fn parse_population(text: &str) -> Result<Vec<PopulationMember>> {
    let docs: Vec<MemberDoc> =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut shared: Option<Arc<LeafSet>> = None;
    let mut out = Vec::with_capacity(docs.len());
    for doc in docs {
        let tree = doc.tree.into_tree(shared.as_ref())?;
        if let Some(s) = &shared {
            if !Arc::ptr_eq(s, tree.leaves()) {
                return Err(Error::LeafSetMismatch);
            }
        } else {
            shared = Some(tree.leaves().clone());
        }
        out.push(PopulationMember {
            id: doc.id,
            class: doc.class,
            tree,
        });
    }
    Ok(out)
}

pub fn serialize_population(members: &[PopulationMember]) -> String {
    let docs: Vec<MemberDoc> = members
        .iter()
        .map(|m| MemberDoc {
            id: m.id.clone(),
            class: m.class.clone(),
            tree: TreeDoc::from_tree(&m.tree),
        })
        .collect();
    serde_json::to_string_pretty(&docs).expect("population documents always serialize")
}

impl fmt::Display for AttributedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_tree(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_leaf() -> AttributedTree {
        parse_tree(
            r#"{"leaves":["a","b","c","d"],"edges":[
                {"split":["a"],"attr":[1.0]},{"split":["b"],"attr":[1.0]},
                {"split":["c"],"attr":[1.0]},{"split":["d"],"attr":[1.0]},
                {"split":["a","b"],"attr":[2.0]},{"split":["c","d"],"attr":[0.5]}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn single_edge_tree() {
        let t = parse_tree(r#"{"leaves":["a"],"edges":[{"split":["a"],"attr":[1.0]}]}"#).unwrap();
        assert_eq!(t.num_edges(), 1);
        assert_eq!(t.dim(), 1);
        assert_eq!(splits_of(&t).len(), 1);
    }

    #[test]
    fn crossing_splits_rejected() {
        let err = parse_tree(
            r#"{"leaves":["a","b","c","d"],"edges":[
                {"split":["a","b"],"attr":[1.0]},{"split":["b","c"],"attr":[1.0]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::IncompatibleSplits(..)), "{err}");
    }

    #[test]
    fn binary_four_leaf_tree() {
        let t = four_leaf();
        assert_eq!(t.num_edges(), 6);
        let ls = t.leaves().clone();
        let expected: Vec<Split> = [
            vec!["a"],
            vec!["a", "b"],
            vec!["b"],
            vec!["c"],
            vec!["c", "d"],
            vec!["d"],
        ]
        .iter()
        .map(|v| ls.split(v).unwrap())
        .collect();
        assert_eq!(splits_of(&t), expected);
    }

    #[test]
    fn star_tree_has_only_pendants() {
        let t = parse_tree(
            r#"{"leaves":["a","b","c","d"],"edges":[
                {"split":["a"],"attr":[1.0]},{"split":["b"],"attr":[1.0]},
                {"split":["c"],"attr":[1.0]},{"split":["d"],"attr":[1.0]}]}"#,
        )
        .unwrap();
        assert!(splits_of(&t).iter().all(Split::is_pendant));
        assert_eq!(splits_of(&t).len(), 4);
    }

    #[test]
    fn compatibility_cases() {
        let ls = LeafSet::new(["a", "b", "c", "d"]).unwrap();
        let s = |v: &[&str]| ls.split(v).unwrap();
        assert!(compatible(&s(&["a", "b"]), &s(&["a", "b", "c"])).unwrap());
        assert!(compatible(&s(&["a", "b"]), &s(&["c", "d"])).unwrap());
        assert!(!compatible(&s(&["a", "b"]), &s(&["b", "c"])).unwrap());
        let other = LeafSet::new(["a", "b", "c"]).unwrap();
        assert!(compatible(&s(&["a"]), &other.split(["a"]).unwrap()).is_err());
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(parse_tree("{"), Err(Error::Parse(_))));
        assert!(parse_tree(r#"{"leaves":["a","a"],"edges":[]}"#).is_err());
        assert!(matches!(
            parse_tree(
                r#"{"leaves":["a","b"],"edges":[{"split":["a"],"attr":[1.0]},{"split":["b"],"attr":[1.0,2.0]}]}"#
            ),
            Err(Error::DimensionMismatch(1, 2))
        ));
        assert!(parse_tree(r#"{"leaves":["a"],"edges":[{"split":["a"],"attr":[-1.0]}]}"#).is_err());
        assert!(parse_tree(r#"{"leaves":["a"],"edges":[{"split":["z"],"attr":[1.0]}]}"#).is_err());
        assert!(parse_tree(
            r#"{"leaves":["a","b"],"edges":[{"split":["a"],"attr":[1.0]}],"labels":{"x":["b"]}}"#
        )
        .is_err());
    }

    #[test]
    fn permuted_input_gives_identical_output() {
        let a = parse_tree(
            r#"{"leaves":["b","a"],"edges":[{"split":["b"],"attr":[2.0]},{"split":["a"],"attr":[1.0]},{"split":["b","a"],"attr":[3.0]}]}"#,
        )
        .unwrap();
        let b = parse_tree(
            r#"{"leaves":["a","b"],"edges":[{"split":["a","b"],"attr":[3.0]},{"split":["a"],"attr":[1.0]},{"split":["b"],"attr":[2.0]}]}"#,
        )
        .unwrap();
        assert_eq!(serialize_tree(&a), serialize_tree(&b));
        let text = serialize_tree(&a);
        assert_eq!(serialize_tree(&parse_tree(&text).unwrap()), text);
    }

    #[test]
    fn shape_attributes_keep_full_precision() {
        let vals: Vec<f64> = (0..15).map(|i| (i as f64 + 0.1).sqrt() * std::f64::consts::PI).collect();
        let ls = Arc::new(LeafSet::new(["a"]).unwrap());
        let t = AttributedTree::new(
            ls.clone(),
            15,
            [(ls.split(["a"]).unwrap(), EdgeAttribute::new(vals.clone()))],
            [],
        )
        .unwrap();
        let back = parse_tree(&serialize_tree(&t)).unwrap();
        assert_eq!(back, t);
        let got = back.edges().values().next().unwrap().values();
        for (a, b) in got.iter().zip(vals.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn population_shares_leaf_set() {
        let text = format!(
            "[{}, {{\"class\":\"case\",{}}}]",
            serialize_tree(&four_leaf()),
            &serialize_tree(&four_leaf())[1..serialize_tree(&four_leaf()).len() - 1]
        );
        let pop = parse_population(&text).unwrap();
        assert_eq!(pop.len(), 2);
        assert!(Arc::ptr_eq(pop[0].tree.leaves(), pop[1].tree.leaves()));
        assert_eq!(pop[1].class.as_deref(), Some("case"));
        let again = parse_population(&serialize_population(&pop)).unwrap();
        assert_eq!(again, pop);
    }

    #[test]
    fn split_order_is_lexicographic_by_names() {
        let ls = LeafSet::new(["a", "b", "c"]).unwrap();
        let ab = ls.split(["a", "b"]).unwrap();
        let b = ls.split(["b"]).unwrap();
        let a = ls.split(["a"]).unwrap();
        assert!(a < ab);
        assert!(ab < b);
    }
}
