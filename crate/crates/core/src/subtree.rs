//! Labelled subtrees and the subtree-distance feature matrix.
//!
//! Feature `x_ij` is the geodesic distance from subject i's subtree rooted at
//! branch j to a reference mean of all j-th subtrees. In two-class mode each
//! branch yields two columns, one per class mean.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frechet::{frechet_mean, MeanConfig};
use crate::geodesic::geodesic_distance;
use crate::matrix::format_number;
use crate::synthetic::AIRWAY_LABELS;
use crate::tree::{AttributedTree, LeafSet, Split};

/// Ordered branch labels; the order fixes the feature columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtreeScheme {
    labels: Vec<String>,
}

impl Default for SubtreeScheme {
    fn default() -> Self {
        SubtreeScheme {
            labels: AIRWAY_LABELS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl SubtreeScheme {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("scheme has no labels".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::InvalidArgument(format!("duplicate label {l:?}")));
            }
        }
        Ok(SubtreeScheme { labels })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// The subtree rooted at the labelled branch, with that branch as its root
/// edge and the leaf set restricted to the branch's descendants.
pub fn extract_subtree(tree: &AttributedTree, label: &str) -> Result<AttributedTree> {
    let root = tree
        .label_split(label)
        .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
    if root.len() == tree.leaves().len() {
        return Ok(tree.clone());
    }
    let old: Vec<usize> = root.indices().collect();
    let names: Vec<&String> = old.iter().map(|&i| &tree.leaves().names()[i]).collect();
    let leaves = Arc::new(LeafSet::new(names.iter().map(|s| s.as_str()))?);
    // Leaf names are sorted in both sets, so old position k maps to new index k.
    let remap = |s: &Split| -> Split {
        Split::from_indices(
            leaves.len(),
            s.indices().map(|i| old.binary_search(&i).expect("descendant leaf")),
        )
    };
    let edges: BTreeMap<Split, _> = tree
        .edges()
        .iter()
        .filter(|(s, _)| s.is_subset(root))
        .map(|(s, a)| (remap(s), a.clone()))
        .collect();
    let labels = tree
        .labels()
        .iter()
        .filter(|(_, s)| s.is_subset(root))
        .map(|(n, s)| (n.clone(), remap(s)))
        .collect();
    Ok(AttributedTree::from_parts_unchecked(leaves, tree.dim(), edges, labels))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureMode {
    /// One column per label: distance to the mean over all training subjects.
    Pooled,
    /// Two columns per label: distance to each class mean.
    #[default]
    TwoClass,
}

impl std::str::FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pooled" => Ok(FeatureMode::Pooled),
            "two-class" | "twoclass" => Ok(FeatureMode::TwoClass),
            other => Err(Error::InvalidArgument(format!("unknown feature mode {other:?}"))),
        }
    }
}

/// Which mean a column measures distance to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Reference {
    Pooled,
    Class(u8),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureColumn {
    pub label: String,
    pub reference: Reference,
}

/// Column layout for a scheme and mode.
pub fn feature_columns(scheme: &SubtreeScheme, mode: FeatureMode) -> Vec<FeatureColumn> {
    let mut cols = Vec::new();
    for label in scheme.labels() {
        match mode {
            FeatureMode::Pooled => cols.push(FeatureColumn {
                label: label.clone(),
                reference: Reference::Pooled,
            }),
            FeatureMode::TwoClass => {
                for c in 0..2 {
                    cols.push(FeatureColumn {
                        label: label.clone(),
                        reference: Reference::Class(c),
                    });
                }
            }
        }
    }
    cols
}

/// Reference means keyed by (label, reference).
pub type SubtreeMeans = BTreeMap<(String, Reference), AttributedTree>;

/// Computes the reference means needed by `mode` from the given subjects.
pub fn subtree_means(
    trees: &[AttributedTree],
    y: &[u8],
    scheme: &SubtreeScheme,
    mode: FeatureMode,
    cfg: &MeanConfig,
) -> Result<SubtreeMeans> {
    if trees.len() != y.len() {
        return Err(Error::InvalidArgument("one class label per tree required".into()));
    }
    let columns = feature_columns(scheme, mode);
    let computed: Vec<((String, Reference), AttributedTree)> = columns
        .par_iter()
        .map(|col| {
            let members: Vec<AttributedTree> = trees
                .iter()
                .zip(y)
                .filter(|(_, &c)| match col.reference {
                    Reference::Pooled => true,
                    Reference::Class(k) => c == k,
                })
                .map(|(t, _)| extract_subtree(t, &col.label))
                .collect::<Result<_>>()?;
            if members.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "no subjects available for the {:?} mean of {}",
                    col.reference, col.label
                )));
            }
            Ok(((col.label.clone(), col.reference.clone()), frechet_mean(&members, cfg)?))
        })
        .collect::<Result<_>>()?;
    Ok(computed.into_iter().collect())
}

/// Subject-by-column matrix of subtree distances.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    pub columns: Vec<FeatureColumn>,
    pub rows: Vec<Vec<f64>>,
    pub y: Vec<u8>,
    /// Names of class 0 and class 1.
    pub classes: [String; 2],
}

impl FeatureMatrix {
    pub fn column_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .map(|c| match &c.reference {
                Reference::Pooled => c.label.clone(),
                Reference::Class(k) => format!("{}:{}", c.label, self.classes[*k as usize]),
            })
            .collect()
    }

    /// CSV with header `id,class,<column>,...`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["id".to_string(), "class".to_string()];
        header.extend(self.column_names());
        wr.write_record(&header)?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut rec = vec![self.ids[i].clone(), self.classes[self.y[i] as usize].clone()];
            rec.extend(row.iter().map(|v| format_number(*v)));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

impl FeatureMatrix {
    /// Reads the CSV written by [`FeatureMatrix::write_csv`]. Class names are
    /// numbered in order of first appearance; columns named `label:class`
    /// refer to that class's mean, other columns to the pooled mean.
    pub fn read_csv<R: std::io::Read>(r: R) -> Result<FeatureMatrix> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
        if header.len() < 3 || header[0] != "id" || header[1] != "class" {
            return Err(Error::Parse("feature header must start with id,class and name a column".into()));
        }
        let mut ids = Vec::new();
        let mut names: Vec<String> = Vec::new();
        let mut y = Vec::new();
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            if rec.len() != header.len() {
                return Err(Error::Parse(format!("row {} has {} fields", ids.len() + 1, rec.len())));
            }
            ids.push(rec[0].to_string());
            let class = rec[1].to_string();
            let k = match names.iter().position(|c| *c == class) {
                Some(k) => k,
                None => {
                    names.push(class);
                    names.len() - 1
                }
            };
            if k > 1 {
                return Err(Error::InvalidArgument("feature files must have at most two classes".into()));
            }
            y.push(k as u8);
            let row = rec
                .iter()
                .skip(2)
                .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {v:?}"))))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        while names.len() < 2 {
            names.push(String::new());
        }
        let columns = header[2..]
            .iter()
            .map(|h| match h.rsplit_once(':') {
                Some((label, class)) => match names.iter().position(|c| c == class) {
                    Some(k) => FeatureColumn { label: label.to_string(), reference: Reference::Class(k as u8) },
                    None => FeatureColumn { label: h.clone(), reference: Reference::Pooled },
                },
                None => FeatureColumn { label: h.clone(), reference: Reference::Pooled },
            })
            .collect();
        Ok(FeatureMatrix {
            ids,
            columns,
            rows,
            y,
            classes: [names[0].clone(), names[1].clone()],
        })
    }
}

/// Feature rows for `trees`: `x_ij = d(subtree_j(tree_i), mean_j)`.
pub fn feature_rows(
    trees: &[AttributedTree],
    scheme: &SubtreeScheme,
    mode: FeatureMode,
    means: &SubtreeMeans,
) -> Result<Vec<Vec<f64>>> {
    let columns = feature_columns(scheme, mode);
    trees
        .par_iter()
        .map(|t| {
            let mut row = Vec::with_capacity(columns.len());
            let mut cache: Option<(&str, AttributedTree)> = None;
            for col in &columns {
                let sub = match &cache {
                    Some((l, s)) if *l == col.label => s.clone(),
                    _ => {
                        let s = extract_subtree(t, &col.label)?;
                        cache = Some((&col.label, s.clone()));
                        s
                    }
                };
                let mean = means
                    .get(&(col.label.clone(), col.reference.clone()))
                    .ok_or_else(|| Error::UnknownLabel(col.label.clone()))?;
                row.push(geodesic_distance(&sub, mean)?);
            }
            Ok(row)
        })
        .collect()
}

/// Builds the full feature matrix from precomputed means.
pub fn feature_matrix(
    ids: Vec<String>,
    trees: &[AttributedTree],
    y: Vec<u8>,
    classes: [String; 2],
    scheme: &SubtreeScheme,
    mode: FeatureMode,
    means: &SubtreeMeans,
) -> Result<FeatureMatrix> {
    if ids.len() != trees.len() || y.len() != trees.len() {
        return Err(Error::InvalidArgument("ids, trees and classes must align".into()));
    }
    let rows = feature_rows(trees, scheme, mode, means)?;
    Ok(FeatureMatrix {
        ids,
        columns: feature_columns(scheme, mode),
        rows,
        y,
        classes,
    })
}
