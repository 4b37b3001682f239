//! Sparse logistic classification and a nearest-neighbour baseline.

pub mod cv;
pub mod elastic_net;
pub mod knn;

pub use cv::{cross_validate, CvConfig, CvReport, FixedFeatures, FoldFeatures, TreeFeatures};
pub use elastic_net::{fit_elastic_net, kkt_residual, predict_proba, ElasticNetModel};
pub use knn::{knn_classify, KnnReport};
