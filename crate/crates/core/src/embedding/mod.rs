//! Planar embeddings of distance matrices, Euclidean and hyperbolic.

pub mod distortion;
pub mod isomap;
pub mod mds;
pub mod mdspd;
pub mod poincare;
pub mod stress;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;
use crate::rng::substream;

pub use distortion::{distortion_report, DistortionReport};
pub use isomap::isomap_graph_distances;
pub use mds::classical_mds;
pub use mdspd::{mds_pd, mds_pd_from, DescentConfig, DescentResult};
pub use poincare::{hyperbolic_distance, Mobius, PoincarePoint};
pub use stress::{sammon_stress, stress_gradient, Metric};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mds,
    Isomap,
    Hmds,
    Hisomap,
}

impl Method {
    pub fn metric(self) -> Metric {
        match self {
            Method::Mds | Method::Isomap => Metric::Euclidean,
            Method::Hmds | Method::Hisomap => Metric::Hyperbolic,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Mds => "mds",
            Method::Isomap => "isomap",
            Method::Hmds => "hmds",
            Method::Hisomap => "hisomap",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mds" => Ok(Method::Mds),
            "isomap" => Ok(Method::Isomap),
            "hmds" => Ok(Method::Hmds),
            "hisomap" => Ok(Method::Hisomap),
            other => Err(Error::InvalidArgument(format!("unknown embedding method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingConfig {
    pub method: Method,
    pub isomap_k: usize,
    pub max_iterations: usize,
    pub stress_tolerance: f64,
    pub restarts: usize,
    pub seed: u64,
    pub histogram_bins: usize,
}

impl EmbeddingConfig {
    pub fn new(method: Method, seed: u64) -> Self {
        EmbeddingConfig {
            method,
            isomap_k: 10,
            max_iterations: 10_000,
            stress_tolerance: 1e-9,
            restarts: 5,
            seed,
            histogram_bins: 21,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.isomap_k == 0 {
            return Err(Error::InvalidArgument("isomap k must be at least 1".into()));
        }
        if !(self.stress_tolerance > 0.0) || self.max_iterations == 0 || self.restarts == 0 || self.histogram_bins == 0 {
            return Err(Error::InvalidArgument(
                "tolerance, iterations, restarts and bins must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingResult {
    pub method: Method,
    pub metric: Metric,
    /// Planar coordinates; disk coordinates for hyperbolic methods.
    pub coordinates: Vec<[f64; 2]>,
    /// Sammon stress against the matrix that was embedded.
    pub final_stress: f64,
    pub stress_trace: Vec<f64>,
    /// Final stress of each restart, in seed order.
    pub restart_stresses: Vec<f64>,
    pub distortion: DistortionReport,
    #[serde(skip)]
    pub embedded: DistanceMatrix,
}

impl EmbeddingResult {
    pub fn to_json(&self, ids: &[String]) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            method: Method,
            metric: Metric,
            ids: &'a [String],
            coordinates: &'a [[f64; 2]],
            final_stress: f64,
            stress_trace: &'a [f64],
            restart_stresses: &'a [f64],
            max_distortion: f64,
            min_distortion: f64,
            multiplicative_distortion: f64,
            additive_histogram: &'a crate::histogram::Histogram,
        }
        serde_json::to_string_pretty(&Doc {
            method: self.method,
            metric: self.metric,
            ids,
            coordinates: &self.coordinates,
            final_stress: self.final_stress,
            stress_trace: &self.stress_trace,
            restart_stresses: &self.restart_stresses,
            max_distortion: self.distortion.max_distortion,
            min_distortion: self.distortion.min_distortion,
            multiplicative_distortion: self.distortion.multiplicative_distortion,
            additive_histogram: &self.distortion.additive_histogram,
        })
        .expect("results always serialize")
    }
}

/// Writes `id,label,x,y` rows.
pub fn write_coordinates_csv<W: std::io::Write>(
    w: W,
    ids: &[String],
    labels: Option<&[String]>,
    coords: &[[f64; 2]],
) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["id", "label", "x", "y"])?;
    for (i, c) in coords.iter().enumerate() {
        let label = labels.map_or("", |l| l[i].as_str());
        wr.write_record([
            ids[i].as_str(),
            label,
            &crate::matrix::format_number(c[0]),
            &crate::matrix::format_number(c[1]),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads `id,label,x,y` rows into ids, labels and coordinates.
pub fn read_coordinates_csv<R: std::io::Read>(r: R) -> Result<(Vec<String>, Vec<String>, Vec<[f64; 2]>)> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != ["id", "label", "x", "y"] {
        return Err(Error::Parse("coordinate header must be id,label,x,y".into()));
    }
    let (mut ids, mut labels, mut coords) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rd.records() {
        let rec = rec?;
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {v:?}")));
        ids.push(rec[0].to_string());
        labels.push(rec[1].to_string());
        coords.push([num(&rec[2])?, num(&rec[3])?]);
    }
    Ok((ids, labels, coords))
}

/// Pairwise distances of planar coordinates under `metric`.
pub fn embedded_distances(target: &DistanceMatrix, coords: &[[f64; 2]], metric: Metric) -> Result<DistanceMatrix> {
    let n = coords.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = stress::planar_distance(metric, coords[i], coords[j]);
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    DistanceMatrix::new(target.ids().to_vec(), target.labels().map(<[String]>::to_vec), values)
}

/// Embeds `target` with the configured method and attaches a distortion
/// report against `target`.
pub fn embed(target: &DistanceMatrix, cfg: &EmbeddingConfig) -> Result<EmbeddingResult> {
    cfg.validate()?;
    let graph;
    let source = match cfg.method {
        Method::Mds | Method::Hmds => target,
        Method::Isomap | Method::Hisomap => {
            graph = isomap_graph_distances(target, cfg.isomap_k)?;
            &graph
        }
    };
    let metric = cfg.method.metric();
    let (coordinates, final_stress, stress_trace, restart_stresses) = match metric {
        Metric::Euclidean => {
            let coords: Vec<[f64; 2]> = classical_mds(source, 2).into_iter().map(|c| [c[0], c[1]]).collect();
            let s = sammon_stress(source, &coords, metric)?;
            (coords, s, vec![s], vec![s])
        }
        Metric::Hyperbolic => {
            let dcfg = DescentConfig {
                max_iterations: cfg.max_iterations,
                tolerance: cfg.stress_tolerance,
            };
            let runs: Vec<DescentResult> = (0..cfg.restarts)
                .into_par_iter()
                .map(|r| mds_pd(source, &dcfg, &mut substream(cfg.seed, r as u64)))
                .collect::<Result<_>>()?;
            let stresses: Vec<f64> = runs.iter().map(|r| r.stress).collect();
            let best = (0..runs.len())
                .reduce(|a, b| if runs[b].stress < runs[a].stress { b } else { a })
                .expect("at least one restart");
            let run = runs.into_iter().nth(best).expect("index in range");
            let coords = run.points.iter().map(|p| [p.re, p.im]).collect();
            (coords, run.stress, run.trace, stresses)
        }
    };
    let embedded = embedded_distances(target, &coordinates, metric)?;
    let distortion = distortion_report(target, &embedded, cfg.histogram_bins)?;
    Ok(EmbeddingResult {
        method: cfg.method,
        metric,
        coordinates,
        final_stress,
        stress_trace,
        restart_stresses,
        distortion,
        embedded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mds_on_planar_data_is_isometric() {
        let pts = [[0.0, 0.0], [1.0, 0.2], [0.3, 2.0], [-1.5, 0.7], [2.2, -1.1], [0.9, 0.9]];
        let m = embedded_distances(
            &DistanceMatrix::from_fn(6, |_, _| 1.0).unwrap(),
            &pts,
            Metric::Euclidean,
        )
        .unwrap();
        let r = embed(&m, &EmbeddingConfig::new(Method::Mds, 0)).unwrap();
        assert!((r.distortion.multiplicative_distortion - 1.0).abs() < 1e-9);
        assert!(r.final_stress < 1e-18);
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Mds, Method::Isomap, Method::Hmds, Method::Hisomap] {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("tsne".parse::<Method>().is_err());
    }
}
