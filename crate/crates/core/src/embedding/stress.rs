//! Sammon stress of a planar configuration and its gradient.
//!
//! `E = (1/c) Σ_{j<k} (d_jk − δ_jk)² / δ_jk` with `c = Σ_{j<k} δ_jk`.
//! Pairs with `δ_jk = 0` are left out of both sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Hyperbolic,
}

/// Distance between two planar points under `metric`. Hyperbolic points are
/// disk coordinates.
pub fn planar_distance(metric: Metric, p: [f64; 2], q: [f64; 2]) -> f64 {
    match metric {
        Metric::Euclidean => ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt(),
        Metric::Hyperbolic => {
            super::poincare::disk_distance(num_complex::Complex64::new(p[0], p[1]), num_complex::Complex64::new(q[0], q[1]))
        }
    }
}

/// Upper-triangle view of a target matrix, ready for repeated evaluation.
pub struct StressTarget {
    n: usize,
    /// `(j, k, δ_jk)` for every pair with `δ_jk > 0`.
    pairs: Vec<(u32, u32, f64)>,
    /// `Σ δ_jk`.
    c: f64,
}

impl StressTarget {
    pub fn new(target: &DistanceMatrix) -> StressTarget {
        let n = target.len();
        let mut pairs = Vec::new();
        let mut c = 0.0;
        for j in 0..n {
            for k in j + 1..n {
                let d = target.get(j, k);
                c += d;
                if d > 0.0 {
                    pairs.push((j as u32, k as u32, d));
                }
            }
        }
        StressTarget { n, pairs, c }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn check(&self, points: &[[f64; 2]]) -> Result<()> {
        if points.len() != self.n {
            return Err(Error::DimensionMismatch(self.n, points.len()));
        }
        Ok(())
    }

    pub fn stress(&self, points: &[[f64; 2]], metric: Metric) -> Result<f64> {
        self.check(points)?;
        if self.c == 0.0 {
            return Ok(0.0);
        }
        let mut e = 0.0;
        match metric {
            Metric::Euclidean => {
                for &(j, k, delta) in &self.pairs {
                    let (p, q) = (points[j as usize], points[k as usize]);
                    let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                    e += (d - delta).powi(2) / delta;
                }
            }
            Metric::Hyperbolic => {
                let s = slack(points);
                for &(j, k, delta) in &self.pairs {
                    let (j, k) = (j as usize, k as usize);
                    let (p, q) = (points[j], points[k]);
                    let a = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
                    let b = s[j] * s[k];
                    let d = hyperbolic_from_ab(a, b).0;
                    e += (d - delta).powi(2) / delta;
                }
            }
        }
        Ok(e / self.c)
    }

    pub fn stress_and_gradient(&self, points: &[[f64; 2]], metric: Metric) -> Result<(f64, Vec<[f64; 2]>)> {
        self.check(points)?;
        let mut grad = vec![[0.0; 2]; self.n];
        if self.c == 0.0 {
            return Ok((0.0, grad));
        }
        let mut e = 0.0;
        let s = match metric {
            Metric::Hyperbolic => slack(points),
            Metric::Euclidean => Vec::new(),
        };
        for &(j, k, delta) in &self.pairs {
            let (j, k) = (j as usize, k as usize);
            let (p, q) = (points[j], points[k]);
            let dx = [p[0] - q[0], p[1] - q[1]];
            let a = dx[0] * dx[0] + dx[1] * dx[1];
            let (d, gj, gk) = match metric {
                Metric::Euclidean => {
                    let d = a.sqrt();
                    let g = if d > 0.0 { [dx[0] / d, dx[1] / d] } else { [0.0; 2] };
                    (d, g, [-g[0], -g[1]])
                }
                Metric::Hyperbolic => {
                    // d = acosh(1 + 2A/B) with A = |p − q|², B = (1 − |p|²)(1 − |q|²):
                    // ∂d = (B ∂A − A ∂B) / (B √(A (A + B))).
                    let b = s[j] * s[k];
                    let (d, root) = hyperbolic_from_ab(a, b);
                    if a == 0.0 {
                        (d, [0.0; 2], [0.0; 2])
                    } else {
                        let denom = b * root;
                        let mut gj = [0.0; 2];
                        let mut gk = [0.0; 2];
                        for c in 0..2 {
                            gj[c] = (b * 2.0 * dx[c] + a * 2.0 * p[c] * s[k]) / denom;
                            gk[c] = (-b * 2.0 * dx[c] + a * 2.0 * q[c] * s[j]) / denom;
                        }
                        (d, gj, gk)
                    }
                }
            };
            e += (d - delta).powi(2) / delta;
            let w = 2.0 * (d - delta) / delta / self.c;
            for c in 0..2 {
                grad[j][c] += w * gj[c];
                grad[k][c] += w * gk[c];
            }
        }
        Ok((e / self.c, grad))
    }
}

/// `1 − |z|²` per point.
fn slack(points: &[[f64; 2]]) -> Vec<f64> {
    points.iter().map(|p| 1.0 - (p[0] * p[0] + p[1] * p[1])).collect()
}

/// Hyperbolic distance `2 ln((√(A+B) + √A) / √B)` and `√(A (A + B))`.
fn hyperbolic_from_ab(a: f64, b: f64) -> (f64, f64) {
    let ra = a.sqrt();
    let rab = (a + b).sqrt();
    (2.0 * ((rab + ra) / b.sqrt()).ln(), ra * rab)
}

pub fn sammon_stress(target: &DistanceMatrix, points: &[[f64; 2]], metric: Metric) -> Result<f64> {
    StressTarget::new(target).stress(points, metric)
}

/// Stress and its gradient with respect to each point's coordinates.
pub fn stress_and_gradient(
    target: &DistanceMatrix,
    points: &[[f64; 2]],
    metric: Metric,
) -> Result<(f64, Vec<[f64; 2]>)> {
    StressTarget::new(target).stress_and_gradient(points, metric)
}

pub fn stress_gradient(target: &DistanceMatrix, points: &[[f64; 2]], metric: Metric) -> Result<Vec<[f64; 2]>> {
    Ok(stress_and_gradient(target, points, metric)?.1)
}
