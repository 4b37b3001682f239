//! Geodesic distances on a k-nearest-neighbour graph.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;

/// Undirected adjacency lists of the union of every point's `k` nearest
/// neighbours (ties broken by index).
pub fn knn_graph(target: &DistanceMatrix, k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = target.len();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| target.get(i, a).total_cmp(&target.get(i, b)).then(a.cmp(&b)));
        for &j in others.iter().take(k) {
            adj[i][j] = true;
            adj[j][i] = true;
        }
    }
    (0..n)
        .map(|i| (0..n).filter(|&j| adj[i][j]).map(|j| (j, target.get(i, j))).collect())
        .collect()
}

fn components(graph: &[Vec<(usize, f64)>]) -> Vec<Vec<usize>> {
    let n = graph.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &(v, _) in &graph[u] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[derive(PartialEq, PartialOrd)]
struct Key(f64);

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn dijkstra(graph: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((Key(0.0), source)));
    while let Some(Reverse((Key(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &graph[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((Key(nd), v)));
            }
        }
    }
    dist
}

/// All-pairs shortest-path distances on the k-NN graph. Ids and labels are
/// carried over from `target`.
pub fn isomap_graph_distances(target: &DistanceMatrix, k: usize) -> Result<DistanceMatrix> {
    if k == 0 {
        return Err(Error::InvalidArgument("isomap k must be at least 1".into()));
    }
    let n = target.len();
    let graph = knn_graph(target, k);
    let comps = components(&graph);
    if comps.len() > 1 {
        return Err(Error::Disconnected {
            components: comps
                .into_iter()
                .map(|c| c.into_iter().map(|i| target.ids()[i].clone()).collect())
                .collect(),
        });
    }
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| dijkstra(&graph, s)).collect();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            values[i * n + j] = rows[i][j];
            values[j * n + i] = rows[i][j];
        }
    }
    DistanceMatrix::new(target.ids().to_vec(), target.labels().map(<[String]>::to_vec), values)
}
