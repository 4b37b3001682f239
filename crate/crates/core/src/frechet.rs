//! Fréchet means, variances, permutation tests and correlation of subtree
//! deviations.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{geodesic_distance, GeodesicPath};
use crate::histogram::Histogram;
use crate::rng::{seeded, substream};
use crate::tree::AttributedTree;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanConfig {
    pub max_iterations: usize,
    /// Stop once a whole pass over the sample moves the iterate less than this.
    pub tolerance: f64,
    pub seed: u64,
}

impl MeanConfig {
    pub fn new(max_iterations: usize, tolerance: f64, seed: u64) -> Result<Self> {
        if max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
        }
        if !(tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        Ok(MeanConfig {
            max_iterations,
            tolerance,
            seed,
        })
    }

    /// 1000 iterations per sample and a 1e-6 displacement tolerance.
    pub fn for_sample(n: usize, seed: u64) -> Self {
        MeanConfig {
            max_iterations: 1000 * n.max(1),
            tolerance: 1e-6,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeanResult {
    pub mean: AttributedTree,
    pub objective: f64,
    /// Best objective seen at each snapshot (one per pass over the sample).
    pub trace: Vec<f64>,
    pub iterations: usize,
}

/// Sum of squared geodesic distances from `center` to every tree.
pub fn frechet_objective(trees: &[AttributedTree], center: &AttributedTree) -> Result<f64> {
    let mut total = 0.0;
    for t in trees {
        let d = geodesic_distance(center, t)?;
        total += d * d;
    }
    Ok(total)
}

/// Approximates the Fréchet mean by the inductive mean: starting at a
/// sample, the k-th iterate moves a fraction `1/k` of the way along the
/// geodesic towards the k-th sample, cycling through a fresh seeded
/// permutation of the inputs on every pass. The best iterate seen at the
/// end of a pass (or the starting tree) is returned.
pub fn frechet_mean_traced(trees: &[AttributedTree], cfg: &MeanConfig) -> Result<MeanResult> {
    let n = trees.len();
    if n == 0 {
        return Err(Error::InvalidArgument("Fréchet mean of an empty sample".into()));
    }
    for t in &trees[1..] {
        if !t.same_leaves(&trees[0]) {
            return Err(Error::LeafSetMismatch);
        }
        if t.dim() != trees[0].dim() {
            return Err(Error::DimensionMismatch(trees[0].dim(), t.dim()));
        }
    }
    if n == 1 {
        return Ok(MeanResult {
            mean: trees[0].clone(),
            objective: 0.0,
            trace: vec![0.0],
            iterations: 0,
        });
    }

    let mut rng = seeded(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut current = trees[order[0]].clone();
    let mut best = current.clone();
    let mut best_obj = frechet_objective(trees, &current)?;
    let mut trace = vec![best_obj];
    let mut k = 1usize;
    let mut pos = 1usize;
    let mut pass_move: f64 = 0.0;
    while k < cfg.max_iterations {
        if pos == n {
            let obj = frechet_objective(trees, &current)?;
            if obj < best_obj {
                best_obj = obj;
                best = current.clone();
            }
            trace.push(best_obj);
            if pass_move < cfg.tolerance {
                break;
            }
            pass_move = 0.0;
            order.shuffle(&mut rng);
            pos = 0;
        }
        k += 1;
        let path = GeodesicPath::new(&current, &trees[order[pos]])?;
        let w = 1.0 / k as f64;
        pass_move = pass_move.max(w * path.length());
        current = path.point(w)?;
        pos += 1;
    }
    let obj = frechet_objective(trees, &current)?;
    if obj < best_obj {
        best_obj = obj;
        best = current;
    }
    trace.push(best_obj);
    Ok(MeanResult {
        mean: best,
        objective: best_obj,
        trace,
        iterations: k,
    })
}

pub fn frechet_mean(trees: &[AttributedTree], cfg: &MeanConfig) -> Result<AttributedTree> {
    Ok(frechet_mean_traced(trees, cfg)?.mean)
}

/// Sample variance about `mean`: `Σ d²(t, mean) / (N - 1)`.
pub fn variance(trees: &[AttributedTree], mean: &AttributedTree) -> Result<f64> {
    if trees.len() < 2 {
        return Err(Error::InvalidArgument("variance needs at least two trees".into()));
    }
    Ok(frechet_objective(trees, mean)? / (trees.len() - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatisticKind {
    Mean,
    Variance,
}

impl std::str::FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(StatisticKind::Mean),
            "variance" => Ok(StatisticKind::Variance),
            other => Err(Error::InvalidArgument(format!("unknown statistic {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationTestReport {
    pub kind: StatisticKind,
    pub observed: f64,
    pub permuted: Vec<f64>,
    pub p_value: f64,
    pub seed: u64,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    kind: StatisticKind,
    observed: f64,
    p_value: f64,
    #[serde(rename = "M")]
    m: usize,
    seed: u64,
    permuted_summary: BTreeMap<&'static str, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    permuted: Option<&'a [f64]>,
}

impl PermutationTestReport {
    pub fn m(&self) -> usize {
        self.permuted.len()
    }

    /// Quantiles of the permutation distribution (nearest-rank on the
    /// sorted values).
    pub fn permuted_summary(&self) -> BTreeMap<&'static str, f64> {
        let mut v = self.permuted.clone();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let idx = ((v.len() - 1) as f64 * p).round() as usize;
            v[idx]
        };
        BTreeMap::from([
            ("min", q(0.0)),
            ("q05", q(0.05)),
            ("q25", q(0.25)),
            ("median", q(0.5)),
            ("q75", q(0.75)),
            ("q95", q(0.95)),
            ("max", q(1.0)),
        ])
    }

    pub fn to_json(&self, include_permuted: bool) -> String {
        let doc = ReportDoc {
            kind: self.kind,
            observed: self.observed,
            p_value: self.p_value,
            m: self.m(),
            seed: self.seed,
            permuted_summary: self.permuted_summary(),
            permuted: include_permuted.then_some(&self.permuted[..]),
        };
        serde_json::to_string_pretty(&doc).expect("reports always serialize")
    }
}

/// `(1 + #{permuted >= observed}) / (M + 1)`.
pub fn permutation_p_value(observed: f64, permuted: &[f64]) -> f64 {
    let exceed = permuted.iter().filter(|&&t| t >= observed).count();
    (1 + exceed) as f64 / (permuted.len() + 1) as f64
}

fn group_statistic(
    g1: &[&AttributedTree],
    g2: &[&AttributedTree],
    kind: StatisticKind,
    cfg: &MeanConfig,
) -> Result<f64> {
    let g1: Vec<AttributedTree> = g1.iter().map(|t| (*t).clone()).collect();
    let g2: Vec<AttributedTree> = g2.iter().map(|t| (*t).clone()).collect();
    let m1 = frechet_mean(&g1, cfg)?;
    let m2 = frechet_mean(&g2, cfg)?;
    match kind {
        StatisticKind::Mean => geodesic_distance(&m1, &m2),
        StatisticKind::Variance => Ok((variance(&g1, &m1)? - variance(&g2, &m2)?).abs()),
    }
}

/// Two-sample permutation test on the distance between group means or the
/// absolute difference of group variances. Replicate `i` draws its partition
/// from stream `i` of `seed`, so results do not depend on scheduling.
/// Partitions are drawn independently and may repeat.
pub fn permutation_test(
    g1: &[AttributedTree],
    g2: &[AttributedTree],
    kind: StatisticKind,
    m: usize,
    seed: u64,
    mean_cfg: &MeanConfig,
) -> Result<PermutationTestReport> {
    if m < 1 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    if g1.len() < 2 || g2.len() < 2 {
        return Err(Error::InvalidArgument("each group needs at least two trees".into()));
    }
    let pooled: Vec<&AttributedTree> = g1.iter().chain(g2.iter()).collect();
    let n1 = g1.len();
    let observed = group_statistic(&pooled[..n1], &pooled[n1..], kind, mean_cfg)?;
    let permuted: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let mut idx: Vec<usize> = (0..pooled.len()).collect();
            idx.shuffle(&mut rng);
            let a: Vec<&AttributedTree> = idx[..n1].iter().map(|&j| pooled[j]).collect();
            let b: Vec<&AttributedTree> = idx[n1..].iter().map(|&j| pooled[j]).collect();
            group_statistic(&a, &b, kind, mean_cfg)
        })
        .collect::<Result<_>>()?;
    let p_value = permutation_p_value(observed, &permuted);
    Ok(PermutationTestReport {
        kind,
        observed,
        permuted,
        p_value,
        seed,
    })
}

/// Pearson's sample correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidArgument("correlation needs at least two points".into()));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidArgument("constant input has zero standard deviation".into()));
    }
    let sx = (sxx / (n - 1) as f64).sqrt();
    let sy = (syy / (n - 1) as f64).sqrt();
    Ok((sxy / ((n - 1) as f64 * sx * sy)).clamp(-1.0, 1.0))
}

/// Pairwise correlation of subtree deviations from their means, laid out as
/// a scatter matrix with per-label histograms on the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub labels: Vec<String>,
    /// `deviations[j][i]` is the distance of subject i's subtree j to mean j.
    pub deviations: Vec<Vec<f64>>,
    /// Symmetric matrix of Pearson coefficients.
    pub r: Vec<Vec<f64>>,
    pub histograms: Vec<Histogram>,
}

impl CorrelationReport {
    /// Scatter data for the label pair `(j, k)`.
    pub fn scatter(&self, j: usize, k: usize) -> Vec<(f64, f64)> {
        self.deviations[j]
            .iter()
            .copied()
            .zip(self.deviations[k].iter().copied())
            .collect()
    }
}

pub fn deviation_correlation(labels: Vec<String>, deviations: Vec<Vec<f64>>, bins: usize) -> Result<CorrelationReport> {
    let d = labels.len();
    if deviations.len() != d {
        return Err(Error::InvalidArgument("one deviation vector per label required".into()));
    }
    let mut r = vec![vec![0.0; d]; d];
    for j in 0..d {
        r[j][j] = 1.0;
        for k in j + 1..d {
            let v = pearson(&deviations[j], &deviations[k])?;
            r[j][k] = v;
            r[k][j] = v;
        }
    }
    let histograms = deviations.iter().map(|v| Histogram::new(v, bins)).collect();
    Ok(CorrelationReport {
        labels,
        deviations,
        r,
        histograms,
    })
}

/// Correlates, for every pair of subtree labels, the distances of each
/// subject's subtree to the corresponding mean. Every label must list the
/// same subjects in the same order.
pub fn subtree_variance_correlation(
    populations: &BTreeMap<String, Vec<AttributedTree>>,
    means: &BTreeMap<String, AttributedTree>,
    bins: usize,
) -> Result<CorrelationReport> {
    let mut sizes = populations.values().map(Vec::len);
    if let Some(first) = sizes.next() {
        if sizes.any(|s| s != first) {
            return Err(Error::InvalidArgument(
                "all labels must list the same number of subjects".into(),
            ));
        }
    }
    let mut labels = Vec::new();
    let mut deviations = Vec::new();
    for (label, trees) in populations {
        let mean = means
            .get(label)
            .ok_or_else(|| Error::UnknownLabel(label.clone()))?;
        let devs = trees
            .par_iter()
            .map(|t| geodesic_distance(t, mean))
            .collect::<Result<Vec<f64>>>()?;
        labels.push(label.clone());
        deviations.push(devs);
    }
    deviation_correlation(labels, deviations, bins)
}
