//! Elastic-net penalized logistic regression.
//!
//! Minimizes over `(b0, β)`
//!
//! ```text
//! Σ_i [log(1 + exp(η_i)) − y_i η_i] + λ (α ‖β‖₁ + (1 − α)/2 ‖β‖₂²),   η_i = b0 + x_iᵀβ
//! ```
//!
//! by cyclic coordinate descent. Each coordinate first tries a Newton step
//! on its exact curvature and falls back to the step from the global
//! curvature bound `Σ x_ij² / 4` whenever the Newton step fails to decrease
//! the objective, so every update is a descent step. The intercept is not
//! penalized.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub standardize: bool,
    /// Convergence threshold on the largest coefficient change in a cycle.
    pub tolerance: f64,
    /// Convergence threshold on the optimality residual.
    pub kkt_tolerance: f64,
    pub max_cycles: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            standardize: true,
            tolerance: 1e-8,
            kkt_tolerance: 1e-7,
            max_cycles: 100_000,
        }
    }
}

/// Column centering and scaling learned from training data.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    /// Population standard deviations; zero for constant columns.
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Standardizer {
        let n = x.len() as f64;
        let d = x.first().map_or(0, Vec::len);
        let mut means = vec![0.0; d];
        for row in x {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut scales = vec![0.0; d];
        for row in x {
            for j in 0..d {
                scales[j] += (row[j] - means[j]).powi(2);
            }
        }
        scales.iter_mut().for_each(|s| *s = (*s / n).sqrt());
        Standardizer { means, scales }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElasticNetModel {
    pub beta: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub alpha: f64,
    /// Present when the model was fit on standardized features; `beta` is
    /// then on the standardized scale.
    pub standardizer: Option<Standardizer>,
    pub cycles: usize,
    /// Objective after each coordinate cycle.
    pub objective_trace: Vec<f64>,
}

impl ElasticNetModel {
    pub fn new(beta: Vec<f64>, intercept: f64, lambda: f64, alpha: f64) -> Self {
        ElasticNetModel {
            beta,
            intercept,
            lambda,
            alpha,
            standardizer: None,
            cycles: 0,
            objective_trace: Vec::new(),
        }
    }

    /// Indices of nonzero coefficients.
    pub fn selected(&self) -> Vec<usize> {
        (0..self.beta.len()).filter(|&j| self.beta[j] != 0.0).collect()
    }

    pub fn to_json(&self, columns: &[String]) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            alpha: f64,
            lambda: f64,
            intercept: f64,
            beta: serde_json::Map<String, serde_json::Value>,
            selected: Vec<&'a str>,
        }
        let beta = columns
            .iter()
            .zip(&self.beta)
            .map(|(c, b)| (c.clone(), serde_json::json!(b)))
            .collect();
        let doc = Doc {
            alpha: self.alpha,
            lambda: self.lambda,
            intercept: self.intercept,
            beta,
            selected: self.selected().iter().map(|&j| columns[j].as_str()).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("models always serialize")
    }
}

/// Logistic function, kept strictly inside (0, 1).
pub fn sigmoid(eta: f64) -> f64 {
    let p = if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// `log(1 + exp(eta))` without overflow.
fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

/// `softplus(eta + h) - softplus(eta)`, accurate for small `h`.
fn loss_change(eta: f64, h: f64) -> f64 {
    (sigmoid(eta) * h.exp_m1()).ln_1p()
}

/// P(y = 1 | x).
pub fn predict_proba(model: &ElasticNetModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.beta.len() {
        return Err(Error::DimensionMismatch(model.beta.len(), x.len()));
    }
    let z;
    let x = match &model.standardizer {
        Some(s) => {
            z = s.apply(x);
            &z[..]
        }
        None => x,
    };
    let eta = model.intercept + x.iter().zip(&model.beta).map(|(a, b)| a * b).sum::<f64>();
    Ok(sigmoid(eta))
}

fn validate(x: &[Vec<f64>], y: &[u8]) -> Result<usize> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::InvalidArgument("X and y must be non-empty and aligned".into()));
    }
    if y.iter().any(|&v| v > 1) {
        return Err(Error::InvalidArgument("class labels must be 0 or 1".into()));
    }
    let d = x[0].len();
    for row in x {
        if row.len() != d {
            return Err(Error::DimensionMismatch(d, row.len()));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite feature value".into()));
        }
    }
    Ok(d)
}

/// Column-major design used by the solver.
struct Design {
    cols: Vec<Vec<f64>>,
    y: Vec<f64>,
    n: usize,
}

impl Design {
    fn new(x: &[Vec<f64>], y: &[u8], standardizer: Option<&Standardizer>) -> Design {
        let rows: Vec<Vec<f64>> = match standardizer {
            Some(s) => x.iter().map(|r| s.apply(r)).collect(),
            None => x.to_vec(),
        };
        let d = rows[0].len();
        let cols = (0..d).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        Design {
            cols,
            y: y.iter().map(|&v| v as f64).collect(),
            n: x.len(),
        }
    }

    fn eta(&self, intercept: f64, beta: &[f64]) -> Vec<f64> {
        let mut eta = vec![intercept; self.n];
        for (col, b) in self.cols.iter().zip(beta) {
            if *b != 0.0 {
                for (e, v) in eta.iter_mut().zip(col) {
                    *e += v * b;
                }
            }
        }
        eta
    }

    fn loss(&self, eta: &[f64]) -> f64 {
        eta.iter().zip(&self.y).map(|(e, y)| softplus(*e) - y * e).sum()
    }
}

fn penalty(beta: &[f64], lambda: f64, alpha: f64) -> f64 {
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    let l2: f64 = beta.iter().map(|b| b * b).sum();
    lambda * (alpha * l1 + 0.5 * (1.0 - alpha) * l2)
}

fn soft_threshold(z: f64, g: f64) -> f64 {
    if z > g {
        z - g
    } else if z < -g {
        z + g
    } else {
        0.0
    }
}

/// Largest violation of the optimality conditions.
fn kkt(design: &Design, eta: &[f64], beta: &[f64], lambda: f64, alpha: f64) -> f64 {
    let resid: Vec<f64> = eta.iter().zip(&design.y).map(|(e, y)| sigmoid(*e) - y).collect();
    let mut worst = resid.iter().sum::<f64>().abs();
    for (j, col) in design.cols.iter().enumerate() {
        let g = col.iter().zip(&resid).map(|(x, r)| x * r).sum::<f64>()
            + lambda * (1.0 - alpha) * beta[j];
        let v = if beta[j] != 0.0 {
            (g + lambda * alpha * beta[j].signum()).abs()
        } else {
            (g.abs() - lambda * alpha).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

/// Optimality residual of `model` on raw data `(x, y)`, measured on the
/// scale the model was fit on.
pub fn kkt_residual(model: &ElasticNetModel, x: &[Vec<f64>], y: &[u8]) -> Result<f64> {
    validate(x, y)?;
    let design = Design::new(x, y, model.standardizer.as_ref());
    let eta = design.eta(model.intercept, &model.beta);
    Ok(kkt(&design, &eta, &model.beta, model.lambda, model.alpha))
}

/// Smallest λ at which every coefficient is zero, rounded up by a relative
/// 1e-12 so the zero fit survives rounding in the solver.
pub fn lambda_max(x: &[Vec<f64>], y: &[u8], alpha: f64, standardize: bool) -> Result<f64> {
    validate(x, y)?;
    let st = standardize.then(|| Standardizer::fit(x));
    let design = Design::new(x, y, st.as_ref());
    let ybar = design.y.iter().sum::<f64>() / design.n as f64;
    let g = design
        .cols
        .iter()
        .map(|c| c.iter().zip(&design.y).map(|(x, y)| x * (y - ybar)).sum::<f64>().abs())
        .fold(0.0, f64::max);
    Ok(g / alpha.max(1e-3) * (1.0 + 1e-12))
}

/// Fits one model, optionally warm-started from `init`.
pub fn fit_elastic_net_with(
    x: &[Vec<f64>],
    y: &[u8],
    lambda: f64,
    alpha: f64,
    opts: &FitOptions,
    init: Option<&ElasticNetModel>,
) -> Result<ElasticNetModel> {
    let d = validate(x, y)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda {lambda} must be finite and >= 0")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} outside [0, 1]")));
    }
    let standardizer = opts.standardize.then(|| Standardizer::fit(x));
    let design = Design::new(x, y, standardizer.as_ref());
    let n = design.n as f64;

    let (mut intercept, mut beta) = match init {
        Some(m) if m.beta.len() == d => (m.intercept, m.beta.clone()),
        _ => {
            let ybar = design.y.iter().sum::<f64>() / n;
            let b0 = if ybar > 0.0 && ybar < 1.0 {
                (ybar / (1.0 - ybar)).ln()
            } else {
                0.0
            };
            (b0, vec![0.0; d])
        }
    };
    let mut eta = design.eta(intercept, &beta);
    let bounds: Vec<f64> = design
        .cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>() / 4.0)
        .collect();
    let l1 = lambda * alpha;
    let l2 = lambda * (1.0 - alpha);
    let mut trace = vec![design.loss(&eta) + penalty(&beta, lambda, alpha)];

    let mut cycles = 0;
    while cycles < opts.max_cycles {
        cycles += 1;
        let mut max_change: f64 = 0.0;

        // Intercept: Newton step, falling back to the n/4 bound.
        {
            let (g, h) = eta.iter().zip(&design.y).fold((0.0, 0.0), |(g, h), (e, y)| {
                let p = sigmoid(*e);
                (g + p - y, h + p * (1.0 - p))
            });
            // Loss change of shifting every eta by `step`.
            let change = |step: f64| -> f64 {
                eta.iter().zip(&design.y).map(|(e, y)| loss_change(*e, step) - y * step).sum()
            };
            let mut step = if h > 1e-300 { -g / h } else { 0.0 };
            if step != 0.0 && change(step) >= 0.0 {
                step = -g / (n / 4.0);
            }
            if step != 0.0 && change(step) < 0.0 {
                intercept += step;
                eta.iter_mut().for_each(|e| *e += step);
                max_change = max_change.max(step.abs());
            }
        }

        for j in 0..d {
            if bounds[j] == 0.0 {
                continue;
            }
            let col = &design.cols[j];
            let (g, h) = col.iter().zip(eta.iter().zip(&design.y)).fold(
                (0.0, 0.0),
                |(g, h), (x, (e, y))| {
                    let p = sigmoid(*e);
                    (g + x * (p - y), h + x * x * p * (1.0 - p))
                },
            );
            let old = beta[j];
            // Objective change of moving beta[j] from `old` to `b`.
            let change = |b: f64| -> f64 {
                let delta = b - old;
                let loss: f64 = col
                    .iter()
                    .zip(eta.iter().zip(&design.y))
                    .map(|(x, (e, y))| loss_change(*e, x * delta) - y * x * delta)
                    .sum();
                loss + l1 * (b.abs() - old.abs()) + 0.5 * l2 * (b * b - old * old)
            };
            let update = |curv: f64| soft_threshold(curv * old - g, l1) / (curv + l2);
            let mut new = old;
            if h > 1e-12 {
                let cand = update(h);
                if change(cand) < 0.0 {
                    new = cand;
                }
            }
            if new == old {
                let cand = update(bounds[j]);
                if change(cand) < 0.0 {
                    new = cand;
                }
            }
            if new != old {
                let delta = new - old;
                for (e, x) in eta.iter_mut().zip(col) {
                    *e += x * delta;
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        trace.push(design.loss(&eta) + penalty(&beta, lambda, alpha));
        if max_change < opts.tolerance && kkt(&design, &eta, &beta, lambda, alpha) < opts.kkt_tolerance {
            break;
        }
        if max_change == 0.0 {
            break;
        }
    }

    Ok(ElasticNetModel {
        beta,
        intercept,
        lambda,
        alpha,
        standardizer,
        cycles,
        objective_trace: trace,
    })
}

pub fn fit_elastic_net(x: &[Vec<f64>], y: &[u8], lambda: f64, alpha: f64) -> Result<ElasticNetModel> {
    fit_elastic_net_with(x, y, lambda, alpha, &FitOptions::default(), None)
}

/// `count` log-spaced values from `max` down to `max * min_ratio`.
pub fn lambda_grid(max: f64, count: usize, min_ratio: f64) -> Vec<f64> {
    if count == 1 {
        return vec![max];
    }
    let (hi, lo) = (max.ln(), (max * min_ratio).ln());
    (0..count)
        .map(|i| (hi + (lo - hi) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Fits a warm-started path over `lambdas` (in the given order).
pub fn fit_path(
    x: &[Vec<f64>],
    y: &[u8],
    lambdas: &[f64],
    alpha: f64,
    opts: &FitOptions,
) -> Result<Vec<ElasticNetModel>> {
    let mut out: Vec<ElasticNetModel> = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let m = fit_elastic_net_with(x, y, l, alpha, opts, out.last())?;
        out.push(m);
    }
    Ok(out)
}
