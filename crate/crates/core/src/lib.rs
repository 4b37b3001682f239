//! Statistics on tree-space and low-distortion embeddings of metric data.

pub mod classify;
pub mod embedding;
pub mod error;
pub mod frechet;
pub mod geodesic;
pub mod histogram;
pub mod matrix;
pub mod rng;
pub mod subtree;
pub mod svg;
pub mod synthetic;
pub mod tree;

pub use error::{Error, Result};
pub use geodesic::{
    brute_force_distance, distance_matrix, geodesic_distance, geodesic_point, GeodesicPath,
};
pub use matrix::DistanceMatrix;
pub use tree::{
    compatible, parse_population, parse_tree, serialize_population, serialize_tree, splits_of,
    AttributedTree, EdgeAttribute, LeafSet, PopulationMember, Split,
};
