//! k-nearest-neighbour classification on a precomputed distance matrix.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::classify::cv::{mean_sd, stratified_folds};
use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnnReport {
    pub k: usize,
    pub folds: usize,
    pub seed: u64,
    /// Fraction of all subjects classified correctly.
    pub accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub accuracy_mean: f64,
    pub accuracy_sd: f64,
    pub predictions: Vec<String>,
}

impl KnnReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Majority vote among the `k` nearest of `train` to `query`.
///
/// Neighbours are ordered by distance, then index. A tied vote goes to the
/// label whose voters have the smaller summed distance, then to the label
/// that sorts first.
pub fn knn_predict<'a>(
    d: &DistanceMatrix,
    labels: &'a [String],
    train: &[usize],
    query: usize,
    k: usize,
) -> Result<&'a str> {
    if k == 0 || k >= train.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be in 1..{} (training size)",
            train.len()
        )));
    }
    let mut near: Vec<(f64, usize)> = train.iter().map(|&j| (d.get(query, j), j)).collect();
    near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for &(dist, j) in &near[..k] {
        let e = votes.entry(labels[j].as_str()).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += dist;
    }
    let mut best: Option<(&str, usize, f64)> = None;
    for (label, (count, sum)) in votes {
        let better = match best {
            None => true,
            Some((_, c, s)) => count > c || (count == c && sum < s),
        };
        if better {
            best = Some((label, count, sum));
        }
    }
    Ok(best.expect("k >= 1").0)
}

/// Cross-validated kNN accuracy with stratified folds drawn from `seed`.
pub fn knn_classify(
    d: &DistanceMatrix,
    labels: &[String],
    k: usize,
    folds: usize,
    seed: u64,
) -> Result<KnnReport> {
    let n = d.len();
    if labels.len() != n {
        return Err(Error::DimensionMismatch(n, labels.len()));
    }
    if folds < 2 || folds > n {
        return Err(Error::InvalidArgument(format!("{folds} folds for {n} subjects")));
    }
    let names: Vec<&String> = {
        let mut v: Vec<&String> = labels.iter().collect();
        v.sort();
        v.dedup();
        v
    };
    let classes: Vec<usize> = labels
        .iter()
        .map(|l| names.binary_search(&l).expect("label present"))
        .collect();
    let assignment = stratified_folds(&classes, folds, &mut seeded(seed));

    let mut predictions = vec![String::new(); n];
    let mut fold_acc = Vec::with_capacity(folds);
    let mut hits = 0;
    for test in &assignment {
        let train: Vec<usize> = (0..n).filter(|i| test.binary_search(i).is_err()).collect();
        let mut fold_hits = 0;
        for &q in test {
            let p = knn_predict(d, labels, &train, q, k)?;
            if p == labels[q] {
                fold_hits += 1;
            }
            predictions[q] = p.to_string();
        }
        hits += fold_hits;
        if !test.is_empty() {
            fold_acc.push(fold_hits as f64 / test.len() as f64);
        }
    }
    let (m, s) = mean_sd(&fold_acc);
    Ok(KnnReport {
        k,
        folds,
        seed,
        accuracy: hits as f64 / n as f64,
        fold_accuracies: fold_acc,
        accuracy_mean: m,
        accuracy_sd: s,
        predictions,
    })
}
