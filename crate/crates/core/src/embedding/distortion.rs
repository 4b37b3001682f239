//! Pairwise distortion of an embedding.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::histogram::Histogram;
use crate::matrix::DistanceMatrix;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionReport {
    /// `original / embedded` for every pair `i < j`, row-major.
    pub ratios: Vec<f64>,
    /// Over pairs with a nonzero original distance.
    pub max_distortion: f64,
    pub min_distortion: f64,
    pub multiplicative_distortion: f64,
    /// `embedded − original` over all pairs, in bins symmetric about zero.
    pub additive_histogram: Histogram,
}

impl DistortionReport {
    /// `{"multiplicative", "max", "min", "histogram": {"edges", "counts"}}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "multiplicative": self.multiplicative_distortion,
            "max": self.max_distortion,
            "min": self.min_distortion,
            "histogram": self.additive_histogram,
        }))
        .expect("reports always serialize")
    }
}

pub fn distortion_report(original: &DistanceMatrix, embedded: &DistanceMatrix, bins: usize) -> Result<DistortionReport> {
    let n = original.len();
    if embedded.len() != n {
        return Err(Error::DimensionMismatch(n, embedded.len()));
    }
    let mut ratios = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut errors = Vec::with_capacity(ratios.capacity());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        for j in i + 1..n {
            let (o, e) = (original.get(i, j), embedded.get(i, j));
            errors.push(e - o);
            if o == 0.0 {
                ratios.push(if e == 0.0 { 1.0 } else { 0.0 });
                continue;
            }
            if e == 0.0 {
                return Err(Error::Computation(format!(
                    "points {} and {} coincide in the embedding",
                    original.ids()[i],
                    original.ids()[j]
                )));
            }
            let r = o / e;
            lo = lo.min(r);
            hi = hi.max(r);
            ratios.push(r);
        }
    }
    let (max, min, mult) = if hi.is_finite() { (hi, lo, hi / lo) } else { (1.0, 1.0, 1.0) };
    let span = errors.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let span = if span > 0.0 { span } else { 0.5 };
    Ok(DistortionReport {
        ratios,
        max_distortion: max,
        min_distortion: min,
        multiplicative_distortion: mult,
        additive_histogram: Histogram::with_range(&errors, bins, -span, span),
    })
}
