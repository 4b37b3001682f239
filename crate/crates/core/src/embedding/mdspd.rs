//! Steepest descent on Sammon stress in the Poincaré disk.
//!
//! Each iteration moves every point along the geodesic in its negative
//! Riemannian gradient direction. With Euclidean gradient `g` at `z`, the
//! Riemannian direction is `u = −(1 − |z|²)² g / 4`, and a step of size `η`
//! sends `z` to `z ⊕ tanh(η|u| / (1 − |z|²)) u/|u|`. The step size is found
//! by backtracking under an Armijo condition.

use num_complex::Complex64;
use rand::Rng as _;

use crate::embedding::poincare::{mobius_add, PoincarePoint};
use crate::embedding::stress::{Metric, StressTarget};
use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;
use crate::rng::Rng;

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 40;
const INIT_RADIUS: f64 = 0.5;
/// Consecutive small-decrease iterations required to stop.
const PATIENCE: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct DescentConfig {
    pub max_iterations: usize,
    /// Relative stress decrease counted as stalled.
    pub tolerance: f64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig {
            max_iterations: 10_000,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentResult {
    pub points: Vec<PoincarePoint>,
    pub stress: f64,
    /// Stress of the initial configuration and after every accepted step.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

/// Points drawn uniformly by area from the disk of radius 0.5.
pub fn random_init(n: usize, rng: &mut Rng) -> Vec<PoincarePoint> {
    (0..n)
        .map(|_| {
            let r = INIT_RADIUS * rng.random::<f64>().sqrt();
            let t = std::f64::consts::TAU * rng.random::<f64>();
            PoincarePoint::clamped(Complex64::from_polar(r, t))
        })
        .collect()
}

fn as_pairs(points: &[PoincarePoint]) -> Vec<[f64; 2]> {
    points.iter().map(|p| [p.re, p.im]).collect()
}

fn step(points: &[PoincarePoint], dirs: &[Complex64], eta: f64) -> Vec<PoincarePoint> {
    points
        .iter()
        .zip(dirs)
        .map(|(p, u)| {
            let z = p.z();
            let norm = u.norm();
            if norm == 0.0 {
                return *p;
            }
            let w = *u / norm * (eta * norm / (1.0 - z.norm_sqr())).tanh();
            PoincarePoint::clamped(mobius_add(z, w))
        })
        .collect()
}

/// Runs descent from `init`.
pub fn mds_pd_from(target: &DistanceMatrix, init: Vec<PoincarePoint>, cfg: &DescentConfig) -> Result<DescentResult> {
    if init.len() != target.len() {
        return Err(Error::DimensionMismatch(target.len(), init.len()));
    }
    if cfg.max_iterations == 0 || !(cfg.tolerance > 0.0) {
        return Err(Error::InvalidArgument("descent needs iterations and a positive tolerance".into()));
    }
    let target = StressTarget::new(target);
    let mut points = init;
    let (mut e, mut grad) = target.stress_and_gradient(&as_pairs(&points), Metric::Hyperbolic)?;
    let mut trace = vec![e];
    let mut eta = 1.0;
    let mut grow = true;
    let mut stalled = 0;
    let mut iterations = 0;
    while iterations < cfg.max_iterations && e > 0.0 {
        iterations += 1;
        let dirs: Vec<Complex64> = points
            .iter()
            .zip(&grad)
            .map(|(p, g)| {
                let s = 1.0 - p.z().norm_sqr();
                Complex64::new(g[0], g[1]) * (-s * s / 4.0)
            })
            .collect();
        // Slope of stress along the step at η = 0.
        let slope: f64 = dirs.iter().zip(&grad).map(|(u, g)| u.re * g[0] + u.im * g[1]).sum();
        if !(slope < 0.0) {
            break;
        }
        // Try a larger step only after the last one was accepted outright.
        let mut accepted = None;
        let mut trial = if grow { eta * 2.0 } else { eta };
        let mut halvings = 0;
        for _ in 0..=MAX_HALVINGS {
            let cand = step(&points, &dirs, trial);
            let ec = target.stress(&as_pairs(&cand), Metric::Hyperbolic)?;
            if ec.is_finite() && ec <= e + ARMIJO_C * trial * slope && ec < e {
                accepted = Some((cand, ec));
                break;
            }
            trial *= 0.5;
            halvings += 1;
        }
        let Some((cand, ec)) = accepted else { break };
        eta = trial;
        grow = halvings == 0;
        let rel = (e - ec) / e;
        points = cand;
        grad = target.stress_and_gradient(&as_pairs(&points), Metric::Hyperbolic)?.1;
        e = ec;
        trace.push(e);
        stalled = if rel < cfg.tolerance { stalled + 1 } else { 0 };
        if stalled >= PATIENCE {
            break;
        }
    }
    Ok(DescentResult {
        points,
        stress: e,
        trace,
        iterations,
    })
}

/// One seeded run from a random start.
pub fn mds_pd(target: &DistanceMatrix, cfg: &DescentConfig, rng: &mut Rng) -> Result<DescentResult> {
    let init = random_init(target.len(), rng);
    mds_pd_from(target, init, cfg)
}
