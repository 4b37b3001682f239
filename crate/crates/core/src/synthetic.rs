//! Synthetic singular spaces with exact metrics, and synthetic tree
//! populations.
//!
//! The corner is five flat quadrants glued around one apex, i.e. a cone of
//! total angle 5π/2. An open book is a family of closed half-spaces (sheets)
//! glued along their common boundary hyperplane (the spine).

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;
use crate::rng::{seeded, Rng};
use crate::tree::{AttributedTree, EdgeAttribute, LeafSet, Split};

/// Total angle of the corner: five quadrants.
pub const CONE_ANGLE: f64 = 5.0 * FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub radius: f64,
    pub angle: f64,
}

impl ConePoint {
    pub fn new(radius: f64, angle: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("cone radius {radius} must be >= 0")));
        }
        if !(0.0..CONE_ANGLE).contains(&angle) {
            return Err(Error::InvalidArgument(format!(
                "cone angle {angle} outside [0, 5π/2)"
            )));
        }
        Ok(ConePoint { radius, angle })
    }

    /// Index of the quadrant containing the point.
    pub fn quadrant(&self) -> usize {
        ((self.angle / FRAC_PI_2).floor() as usize).min(4)
    }
}

/// Distance on the cone: straight line in the unfolded sector when the
/// angular gap is below π, otherwise the path through the apex.
pub fn cone_distance(p: &ConePoint, q: &ConePoint) -> f64 {
    let diff = (p.angle - q.angle).abs();
    let gap = diff.min(CONE_ANGLE - diff);
    if gap >= PI {
        p.radius + q.radius
    } else {
        let sq = p.radius * p.radius + q.radius * q.radius
            - 2.0 * p.radius * q.radius * gap.cos();
        sq.max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BookPoint {
    pub sheet: usize,
    pub spine: Vec<f64>,
    pub height: f64,
}

/// Distance in an open book. Points on different sheets are joined by the
/// straight line in the plane obtained by unfolding the two sheets across
/// the spine.
pub fn book_distance(p: &BookPoint, q: &BookPoint) -> Result<f64> {
    if p.spine.len() != q.spine.len() {
        return Err(Error::DimensionMismatch(p.spine.len(), q.spine.len()));
    }
    let spine_sq: f64 = p
        .spine
        .iter()
        .zip(q.spine.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let h = if p.sheet == q.sheet {
        p.height - q.height
    } else {
        p.height + q.height
    };
    Ok((spine_sq + h * h).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpacePoints {
    Cone(Vec<ConePoint>),
    Book(Vec<BookPoint>),
}

/// Points of a synthetic space together with their exact distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricDataset {
    pub points: SpacePoints,
    pub labels: Vec<usize>,
    pub params: serde_json::Value,
    pub seed: u64,
    pub matrix: DistanceMatrix,
}

#[derive(Serialize, Deserialize)]
struct DatasetDoc {
    space: String,
    params: serde_json::Value,
    seed: u64,
    points: SpacePoints,
    labels: Vec<usize>,
}

impl MetricDataset {
    fn build(points: SpacePoints, labels: Vec<usize>, params: serde_json::Value, seed: u64) -> Result<Self> {
        let matrix = exact_matrix(&points)?;
        let ids = (0..labels.len()).map(|i| format!("p{i}")).collect();
        let lab = labels.iter().map(|l| l.to_string()).collect();
        let matrix = matrix.with_ids(ids)?.with_labels(Some(lab))?;
        Ok(MetricDataset {
            points,
            labels,
            params,
            seed,
            matrix,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn space_name(&self) -> &'static str {
        match self.points {
            SpacePoints::Cone(_) => "cone",
            SpacePoints::Book(_) => "book",
        }
    }

    pub fn to_json(&self) -> String {
        let doc = DatasetDoc {
            space: self.space_name().to_string(),
            params: self.params.clone(),
            seed: self.seed,
            points: self.points.clone(),
            labels: self.labels.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("dataset documents always serialize")
    }

    /// Parses a dataset document and recomputes its exact matrix.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DatasetDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let ok = matches!(
            (&doc.space[..], &doc.points),
            ("cone", SpacePoints::Cone(_)) | ("book", SpacePoints::Book(_))
        );
        if !ok {
            return Err(Error::Parse(format!("points do not match space {:?}", doc.space)));
        }
        MetricDataset::build(doc.points, doc.labels, doc.params, doc.seed)
    }
}

/// The exact pairwise matrix of a point set.
pub fn exact_matrix(points: &SpacePoints) -> Result<DistanceMatrix> {
    match points {
        SpacePoints::Cone(p) => DistanceMatrix::from_fn(p.len(), |i, j| cone_distance(&p[i], &p[j])),
        SpacePoints::Book(p) => {
            if let Some(first) = p.first() {
                if let Some(bad) = p.iter().find(|q| q.spine.len() != first.spine.len()) {
                    return Err(Error::DimensionMismatch(first.spine.len(), bad.spine.len()));
                }
            }
            DistanceMatrix::from_fn(p.len(), |i, j| book_distance(&p[i], &p[j]).unwrap())
        }
    }
}

fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// The corner dataset: half-normal radius and uniform angle on the cone.
pub fn gen_corner(n: usize, seed: u64) -> Result<MetricDataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut rng = seeded(seed);
    let mut pts = Vec::with_capacity(n);
    for _ in 0..n {
        let radius = normal(&mut rng).abs();
        let angle = rng.random_range(0.0..CONE_ANGLE);
        pts.push(ConePoint { radius, angle });
    }
    let labels = pts.iter().map(ConePoint::quadrant).collect();
    MetricDataset::build(SpacePoints::Cone(pts), labels, json!({ "n": n }), seed)
}

/// An open book with `sheets` sheets of dimension `dim`, `per_sheet` points
/// each. Spine coordinates are standard normal; heights are half-normal.
pub fn gen_sheets(sheets: usize, dim: usize, per_sheet: usize, seed: u64) -> Result<MetricDataset> {
    if sheets < 2 {
        return Err(Error::InvalidArgument("an open book needs at least 2 sheets".into()));
    }
    if dim < 2 {
        return Err(Error::InvalidArgument("sheet dimension must be at least 2".into()));
    }
    let mut rng = seeded(seed);
    let mut pts = Vec::with_capacity(sheets * per_sheet);
    for sheet in 0..sheets {
        for _ in 0..per_sheet {
            let spine = (0..dim - 1).map(|_| normal(&mut rng)).collect();
            let height = normal(&mut rng).abs();
            pts.push(BookPoint { sheet, spine, height });
        }
    }
    let labels = pts.iter().map(|p| p.sheet).collect();
    MetricDataset::build(
        SpacePoints::Book(pts),
        labels,
        json!({ "sheets": sheets, "dim": dim, "per_sheet": per_sheet }),
        seed,
    )
}

// ---------------------------------------------------------------------------
// Trees

/// Branch names of the default subtree scheme, root first.
pub const AIRWAY_LABELS: [&str; 9] = [
    "Trachea", "LMB", "RMB", "LUL", "RUL", "L1+2+3", "LLB", "BronchInt", "RLL",
];

/// A deterministic airway-like template with leaves R1–R10 and L1–L10 and
/// the nine scheme branches labelled. `dim` is 1 for edge lengths, or
/// `3 * l` for shapes of `l` landmark points.
pub fn airway_template(dim: usize) -> Result<AttributedTree> {
    if dim != 1 && (dim == 0 || dim % 3 != 0) {
        return Err(Error::InvalidArgument(format!(
            "attribute dimension {dim} must be 1 or a multiple of 3"
        )));
    }
    let names: Vec<String> = (1..=10)
        .map(|i| format!("L{i}"))
        .chain((1..=10).map(|i| format!("R{i}")))
        .collect();
    let leaves = Arc::new(LeafSet::new(names.clone())?);
    let l = |r: std::ops::RangeInclusive<u32>| r.map(|i| format!("L{i}")).collect::<Vec<_>>();
    let r = |r: std::ops::RangeInclusive<u32>| r.map(|i| format!("R{i}")).collect::<Vec<_>>();

    // (name, leaves below, length, unit direction)
    let mut branches: Vec<(Option<&str>, Vec<String>, f64, [f64; 3])> = vec![
        (Some("Trachea"), names.clone(), 10.0, [0.0, 0.0, -1.0]),
        (Some("LMB"), l(1..=10), 5.0, [0.6, 0.0, -0.8]),
        (Some("RMB"), r(1..=10), 2.5, [-0.6, 0.0, -0.8]),
        (Some("LUL"), l(1..=5), 2.0, [0.5, 0.5, 0.7071067811865476]),
        (Some("LLB"), l(6..=10), 2.0, [0.3, 0.0, -0.9539392014169456]),
        (Some("L1+2+3"), l(1..=3), 1.5, [0.3, 0.3, 0.9055385138137417]),
        (None, l(4..=5), 1.2, [0.8, 0.6, 0.0]),
        (None, l(9..=10), 1.0, [0.6, -0.8, 0.0]),
        (Some("RUL"), r(1..=3), 2.0, [-0.5, 0.5, 0.7071067811865476]),
        (Some("BronchInt"), r(4..=10), 2.5, [-0.2, 0.0, -0.9797958971132712]),
        (None, r(4..=5), 1.2, [-0.8, 0.6, 0.0]),
        (Some("RLL"), r(6..=10), 1.5, [-0.3, 0.0, -0.9539392014169456]),
        (None, r(9..=10), 1.0, [-0.6, -0.8, 0.0]),
    ];
    for (i, name) in names.iter().enumerate() {
        let angle = i as f64 * 0.31;
        let len = 0.8 + 0.05 * (i % 7) as f64;
        branches.push((None, vec![name.clone()], len, [angle.cos(), angle.sin(), 0.0]));
    }

    let mut edges = Vec::new();
    let mut labels = Vec::new();
    for (name, members, len, dir) in branches {
        let split = leaves.split(&members)?;
        let attr = if dim == 1 {
            EdgeAttribute::length(len)
        } else {
            let landmarks = dim / 3;
            let mut v = Vec::with_capacity(dim);
            for p in 1..=landmarks {
                let f = len * p as f64 / landmarks as f64;
                v.extend(dir.iter().map(|c| c * f));
            }
            EdgeAttribute::new(v)
        };
        if let Some(name) = name {
            labels.push((name.to_string(), split.clone()));
        }
        edges.push((split, attr));
    }
    AttributedTree::new(leaves, dim, edges, labels)
}

/// A random tree over `leaves`: a random binary agglomeration, with each
/// interior cluster dropped with probability `drop_prob`. Pendant edges are
/// always present; the root edge is present with probability 1/2.
pub fn random_tree(leaves: &Arc<LeafSet>, dim: usize, drop_prob: f64, rng: &mut Rng) -> Result<AttributedTree> {
    let n = leaves.len();
    let mut clusters: Vec<Split> = (0..n).map(|i| Split::from_indices(n, [i])).collect();
    let mut all: Vec<Split> = clusters.clone();
    while clusters.len() > 1 {
        let i = rng.random_range(0..clusters.len());
        let a = clusters.swap_remove(i);
        let j = rng.random_range(0..clusters.len());
        let b = clusters.swap_remove(j);
        let u = a.union(&b);
        all.push(u.clone());
        clusters.push(u);
    }
    let full = Split::full(n);
    let mut edges = Vec::new();
    for split in all {
        let keep = if split.is_pendant() {
            true
        } else if split == full {
            rng.random_bool(0.5)
        } else {
            !rng.random_bool(drop_prob)
        };
        if !keep {
            continue;
        }
        let attr = if dim == 1 {
            EdgeAttribute::length(rng.random_range(0.1..2.0))
        } else {
            EdgeAttribute::new((0..dim).map(|_| normal(rng)).collect())
        };
        edges.push((split, attr));
    }
    AttributedTree::new(leaves.clone(), dim, edges, [])
}

/// Options for [`gen_tree_population`].
#[derive(Debug, Clone, Default)]
pub struct PopulationParams {
    pub n: usize,
    pub topology_noise: f64,
    pub attr_sigma: f64,
    /// Offsets added to the attributes of the named branches.
    pub class_shift: Option<BTreeMap<String, Vec<f64>>>,
    pub seed: u64,
}

/// Samples trees around a template. Attributes are perturbed by independent
/// normal noise (lengths clamped at zero when k = 1), and with probability
/// `topology_noise` one unlabelled interior branch is re-grafted to join two
/// other children of its parent. Labelled splits are never changed.
pub fn gen_tree_population(template: &AttributedTree, params: &PopulationParams) -> Result<Vec<AttributedTree>> {
    if !(0.0..=1.0).contains(&params.topology_noise) {
        return Err(Error::InvalidArgument("topology_noise must lie in [0, 1]".into()));
    }
    if !(params.attr_sigma >= 0.0) {
        return Err(Error::InvalidArgument("attr_sigma must be nonnegative".into()));
    }
    let k = template.dim();
    let mut base = template.edges().clone();
    if let Some(shift) = &params.class_shift {
        for (name, offset) in shift {
            let split = template
                .label_split(name)
                .ok_or_else(|| Error::UnknownLabel(name.clone()))?;
            if offset.len() != k {
                return Err(Error::DimensionMismatch(k, offset.len()));
            }
            let attr = base.get_mut(split).expect("labels name existing edges");
            let shifted: Vec<f64> = attr.values().iter().zip(offset).map(|(a, b)| a + b).collect();
            *attr = EdgeAttribute::new(shifted);
        }
    }

    let mut rng = seeded(params.seed);
    let mut out = Vec::with_capacity(params.n);
    for _ in 0..params.n {
        let mut edges = base.clone();
        if params.topology_noise > 0.0 && rng.random_bool(params.topology_noise) {
            regraft(&mut edges, template, &mut rng);
        }
        for attr in edges.values_mut() {
            if params.attr_sigma > 0.0 {
                let v: Vec<f64> = attr
                    .values()
                    .iter()
                    .map(|a| {
                        let x = a + params.attr_sigma * normal(&mut rng);
                        if k == 1 {
                            x.max(0.0)
                        } else {
                            x
                        }
                    })
                    .collect();
                *attr = EdgeAttribute::new(v);
            }
        }
        out.push(AttributedTree::new(
            template.leaves().clone(),
            k,
            edges,
            template.labels().clone(),
        )?);
    }
    Ok(out)
}

fn regraft(edges: &mut BTreeMap<Split, EdgeAttribute>, template: &AttributedTree, rng: &mut Rng) {
    let n = template.leaves().len();
    let full = Split::full(n);
    let labelled: Vec<&Split> = template.labels().values().collect();
    let candidates: Vec<Split> = edges
        .keys()
        .filter(|s| !s.is_pendant() && **s != full && !labelled.contains(s))
        .cloned()
        .collect();
    if candidates.is_empty() {
        return;
    }
    let moved = candidates[rng.random_range(0..candidates.len())].clone();
    let parent = edges
        .keys()
        .filter(|s| **s != moved && moved.is_subset(s))
        .min_by_key(|s| s.len())
        .cloned()
        .unwrap_or_else(|| full.clone());
    let attr = edges.remove(&moved).expect("candidate is an edge");

    // Children of the parent once `moved` is contracted.
    let inner: Vec<&Split> = edges
        .keys()
        .filter(|s| **s != parent && s.is_subset(&parent))
        .collect();
    let mut children: Vec<Split> = inner
        .iter()
        .filter(|s| !inner.iter().any(|t| *t != **s && s.is_subset(t)))
        .map(|s| (*s).clone())
        .collect();
    for leaf in parent.indices() {
        if !children.iter().any(|c| c.contains(leaf)) {
            children.push(Split::from_indices(n, [leaf]));
        }
    }
    children.sort();
    let i = rng.random_range(0..children.len());
    let mut j = rng.random_range(0..children.len() - 1);
    if j >= i {
        j += 1;
    }
    let joined = children[i].union(&children[j]);
    if joined == parent || edges.contains_key(&joined) {
        edges.insert(moved, attr);
    } else {
        edges.insert(joined, attr);
    }
}
