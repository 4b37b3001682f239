//! Repeated, stratified, nested cross-validation for the elastic net.
//!
//! Each repeat draws a stratified split into `folds` outer folds. For every
//! outer fold the features are rebuilt from the training subjects only, and
//! a warm-started path is fit over a λ grid expressed as fractions of the
//! training set's λ_max. Test accuracy at each grid index gives the grid
//! report. Independently, inner stratified folds on the outer training set
//! choose a grid index, and the outer-path model at that index gives the
//! nested accuracy estimate.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::elastic_net::{fit_path, lambda_grid, lambda_max, predict_proba, ElasticNetModel, FitOptions};
use crate::error::{Error, Result};
use crate::frechet::MeanConfig;
use crate::rng::{substream, Rng};
use crate::subtree::{feature_columns, feature_rows, subtree_means, FeatureMatrix, FeatureMode, SubtreeScheme};
use crate::tree::AttributedTree;

const MAX_FOLD_ATTEMPTS: usize = 10;

/// Supplies train/test feature rows for a split of the subjects.
pub trait FoldFeatures: Sync {
    fn y(&self) -> &[u8];
    fn columns(&self) -> Vec<String>;
    /// Rows for `train` and `test`, built using the `train` subjects only.
    fn split(&self, train: &[usize], test: &[usize]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)>;
}

/// A precomputed feature matrix used as is in every fold.
pub struct FixedFeatures<'a> {
    pub rows: &'a [Vec<f64>],
    pub y: &'a [u8],
    pub columns: Vec<String>,
}

impl FoldFeatures for FixedFeatures<'_> {
    fn y(&self) -> &[u8] {
        self.y
    }

    fn columns(&self) -> Vec<String> {
        self.columns.clone()
    }

    fn split(&self, train: &[usize], test: &[usize]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let pick = |ix: &[usize]| ix.iter().map(|&i| self.rows[i].clone()).collect();
        Ok((pick(train), pick(test)))
    }
}

impl<'a> From<&'a FeatureMatrix> for FixedFeatures<'a> {
    fn from(m: &'a FeatureMatrix) -> Self {
        FixedFeatures {
            rows: &m.rows,
            y: &m.y,
            columns: m.column_names(),
        }
    }
}

/// Subtree-distance features whose reference means are recomputed on each
/// training set.
pub struct TreeFeatures<'a> {
    pub trees: &'a [AttributedTree],
    pub y: &'a [u8],
    pub classes: [String; 2],
    pub scheme: SubtreeScheme,
    pub mode: FeatureMode,
    pub mean_config: MeanConfig,
}

impl FoldFeatures for TreeFeatures<'_> {
    fn y(&self) -> &[u8] {
        self.y
    }

    fn columns(&self) -> Vec<String> {
        let m = FeatureMatrix {
            ids: vec![],
            columns: feature_columns(&self.scheme, self.mode),
            rows: vec![],
            y: vec![],
            classes: self.classes.clone(),
        };
        m.column_names()
    }

    fn split(&self, train: &[usize], test: &[usize]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let pick = |ix: &[usize]| -> Vec<AttributedTree> { ix.iter().map(|&i| self.trees[i].clone()).collect() };
        let (tr, te) = (pick(train), pick(test));
        let ytr: Vec<u8> = train.iter().map(|&i| self.y[i]).collect();
        let means = subtree_means(&tr, &ytr, &self.scheme, self.mode, &self.mean_config)?;
        Ok((
            feature_rows(&tr, &self.scheme, self.mode, &means)?,
            feature_rows(&te, &self.scheme, self.mode, &means)?,
        ))
    }
}

/// Stratified assignment of subjects to folds: each class is shuffled and
/// dealt round-robin, continuing from where the previous class stopped.
pub fn stratified_folds(classes: &[usize], folds: usize, rng: &mut Rng) -> Vec<Vec<usize>> {
    let ncls = classes.iter().copied().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); folds];
    let mut pos = 0;
    for c in 0..ncls {
        let mut members: Vec<usize> = (0..classes.len()).filter(|&i| classes[i] == c).collect();
        members.shuffle(rng);
        for i in members {
            out[pos % folds].push(i);
            pos += 1;
        }
    }
    for f in &mut out {
        f.sort_unstable();
    }
    out
}

/// Draws stratified folds until every training set holds both classes.
fn binary_folds(y: &[u8], folds: usize, rng: &mut Rng) -> Result<Vec<Vec<usize>>> {
    let classes: Vec<usize> = y.iter().map(|&c| c as usize).collect();
    for _ in 0..MAX_FOLD_ATTEMPTS {
        let f = stratified_folds(&classes, folds, rng);
        let ok = f.iter().all(|test| {
            let mut seen = [false; 2];
            for i in 0..y.len() {
                if test.binary_search(&i).is_err() {
                    seen[y[i] as usize] = true;
                }
            }
            seen[0] && seen[1]
        });
        if ok {
            return Ok(f);
        }
    }
    Err(Error::InvalidArgument(format!(
        "could not draw {folds} folds with both classes in every training set"
    )))
}

fn complement(n: usize, test: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| test.binary_search(i).is_err()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    pub repeats: usize,
    pub alphas: Vec<f64>,
    pub n_lambda: usize,
    pub lambda_min_ratio: f64,
    pub seed: u64,
    pub fit: FitOptions,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 5,
            repeats: 10,
            alphas: vec![1.0, 0.75, 0.5, 0.25],
            n_lambda: 50,
            lambda_min_ratio: 1e-4,
            seed: 0,
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaReport {
    pub alpha: f64,
    /// Grid as fractions of each training set's λ_max.
    pub lambda_ratios: Vec<f64>,
    pub accuracy_mean: Vec<f64>,
    pub accuracy_sd: Vec<f64>,
    /// Grid index with the best mean accuracy; ties go to the larger λ.
    pub chosen_index: usize,
    pub chosen_ratio: f64,
    /// Actual λ at the chosen index, per outer fold.
    pub chosen_lambdas: Vec<f64>,
    /// Columns nonzero at the chosen index in every outer fold.
    pub stable_features: Vec<String>,
    /// Per column, the number of outer folds selecting it at the chosen index.
    pub selection_counts: Vec<usize>,
    pub nested_accuracy_mean: f64,
    pub nested_accuracy_sd: f64,
    pub nested_accuracies: Vec<f64>,
    /// Grid index picked by the inner folds, per outer fold.
    pub nested_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub n: usize,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub columns: Vec<String>,
    pub alphas: Vec<AlphaReport>,
}

impl CvReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

fn accuracy(model: &ElasticNetModel, rows: &[Vec<f64>], y: &[u8]) -> Result<f64> {
    let mut hits = 0;
    for (x, &c) in rows.iter().zip(y) {
        let pred = u8::from(predict_proba(model, x)? >= 0.5);
        hits += usize::from(pred == c);
    }
    Ok(hits as f64 / rows.len() as f64)
}

/// Mean and sample standard deviation.
pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

/// First index of the maximum, so ties resolve to the larger λ.
fn argmax_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn fit_ratio_path(
    x: &[Vec<f64>],
    y: &[u8],
    alpha: f64,
    ratios: &[f64],
    opts: &FitOptions,
) -> Result<Vec<ElasticNetModel>> {
    let lmax = lambda_max(x, y, alpha, opts.standardize)?;
    let lambdas: Vec<f64> = ratios.iter().map(|r| r * lmax).collect();
    fit_path(x, y, &lambdas, alpha, opts)
}

struct FoldResult {
    /// Per alpha: test accuracy at every grid index.
    grid: Vec<Vec<f64>>,
    /// Per alpha: the outer path models.
    models: Vec<Vec<ElasticNetModel>>,
    /// Per alpha: inner-selected grid index.
    nested_index: Vec<usize>,
}

fn run_fold(
    feats: &dyn FoldFeatures,
    train: &[usize],
    test: &[usize],
    inner_seed: u64,
    inner_stream: u64,
    cfg: &CvConfig,
    ratios: &[f64],
) -> Result<FoldResult> {
    let y = feats.y();
    let (xtr, xte) = feats.split(train, test)?;
    let ytr: Vec<u8> = train.iter().map(|&i| y[i]).collect();
    let yte: Vec<u8> = test.iter().map(|&i| y[i]).collect();
    let mut rng = substream(inner_seed, inner_stream);
    let inner = binary_folds(&ytr, cfg.folds, &mut rng)?;

    let mut out = FoldResult {
        grid: vec![],
        models: vec![],
        nested_index: vec![],
    };
    for &alpha in &cfg.alphas {
        let path = fit_ratio_path(&xtr, &ytr, alpha, ratios, &cfg.fit)?;
        let grid = path.iter().map(|m| accuracy(m, &xte, &yte)).collect::<Result<Vec<_>>>()?;

        let mut inner_acc = vec![0.0; ratios.len()];
        for itest in &inner {
            let itrain = complement(xtr.len(), itest);
            let pick_x = |ix: &[usize]| -> Vec<Vec<f64>> { ix.iter().map(|&i| xtr[i].clone()).collect() };
            let pick_y = |ix: &[usize]| -> Vec<u8> { ix.iter().map(|&i| ytr[i]).collect() };
            let ipath = fit_ratio_path(&pick_x(&itrain), &pick_y(&itrain), alpha, ratios, &cfg.fit)?;
            let (ix, iy) = (pick_x(itest), pick_y(itest));
            for (acc, m) in inner_acc.iter_mut().zip(&ipath) {
                *acc += accuracy(m, &ix, &iy)?;
            }
        }
        out.nested_index.push(argmax_first(&inner_acc));
        out.grid.push(grid);
        out.models.push(path);
    }
    Ok(out)
}

/// Runs the full protocol. Results depend only on the inputs and `cfg`, not
/// on scheduling.
pub fn cross_validate(feats: &dyn FoldFeatures, cfg: &CvConfig) -> Result<CvReport> {
    let y = feats.y();
    let n = y.len();
    if cfg.folds < 2 {
        return Err(Error::InvalidArgument("at least 2 folds required".into()));
    }
    if cfg.repeats == 0 || cfg.n_lambda == 0 || cfg.alphas.is_empty() {
        return Err(Error::InvalidArgument("repeats, lambda grid and alphas must be non-empty".into()));
    }
    if cfg.folds > n {
        return Err(Error::InvalidArgument(format!("{} folds for {n} subjects", cfg.folds)));
    }
    if let Some(a) = cfg.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::InvalidArgument(format!("alpha {a} outside [0, 1]")));
    }
    if y.iter().any(|&c| c > 1) {
        return Err(Error::InvalidArgument("class labels must be 0 or 1".into()));
    }
    let ratios = lambda_grid(1.0, cfg.n_lambda, cfg.lambda_min_ratio);

    let mut tasks = Vec::new();
    for r in 0..cfg.repeats {
        let mut rng = substream(cfg.seed, r as u64);
        let outer = binary_folds(y, cfg.folds, &mut rng)?;
        for (f, test) in outer.into_iter().enumerate() {
            let train = complement(n, &test);
            tasks.push((r * cfg.folds + f, train, test));
        }
    }
    let base = cfg.repeats as u64;
    let results: Vec<FoldResult> = tasks
        .par_iter()
        .map(|(k, train, test)| run_fold(feats, train, test, cfg.seed, base + *k as u64, cfg, &ratios))
        .collect::<Result<_>>()?;

    let columns = feats.columns();
    let mut alphas = Vec::new();
    for (a, &alpha) in cfg.alphas.iter().enumerate() {
        let mut accuracy_mean = Vec::with_capacity(ratios.len());
        let mut accuracy_sd = Vec::with_capacity(ratios.len());
        for l in 0..ratios.len() {
            let v: Vec<f64> = results.iter().map(|r| r.grid[a][l]).collect();
            let (m, s) = mean_sd(&v);
            accuracy_mean.push(m);
            accuracy_sd.push(s);
        }
        let chosen = argmax_first(&accuracy_mean);
        let mut counts = vec![0; columns.len()];
        for r in &results {
            for j in r.models[a][chosen].selected() {
                counts[j] += 1;
            }
        }
        let nested: Vec<f64> = results.iter().map(|r| r.grid[a][r.nested_index[a]]).collect();
        let (nm, ns) = mean_sd(&nested);
        alphas.push(AlphaReport {
            alpha,
            lambda_ratios: ratios.clone(),
            accuracy_mean,
            accuracy_sd,
            chosen_index: chosen,
            chosen_ratio: ratios[chosen],
            chosen_lambdas: results.iter().map(|r| r.models[a][chosen].lambda).collect(),
            stable_features: (0..columns.len())
                .filter(|&j| counts[j] == results.len())
                .map(|j| columns[j].clone())
                .collect(),
            selection_counts: counts,
            nested_accuracy_mean: nm,
            nested_accuracy_sd: ns,
            nested_accuracies: nested,
            nested_indices: results.iter().map(|r| r.nested_index[a]).collect(),
        });
    }
    Ok(CvReport {
        n,
        folds: cfg.folds,
        repeats: cfg.repeats,
        seed: cfg.seed,
        columns,
        alphas,
    })
}
