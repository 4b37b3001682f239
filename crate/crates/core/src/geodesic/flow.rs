//! Minimum-weight vertex cover on a bipartite graph, solved as a minimum
//! s-t cut.

use std::collections::VecDeque;

const EPS: f64 = 1e-15;

/// A vertex cover split into the chosen left and right vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub weight: f64,
}

/// Dense residual network; the graphs here have at most a few dozen nodes.
struct Network {
    n: usize,
    cap: Vec<f64>,
}

impl Network {
    fn new(n: usize) -> Self {
        Network {
            n,
            cap: vec![0.0; n * n],
        }
    }

    fn add(&mut self, u: usize, v: usize, c: f64) {
        self.cap[u * self.n + v] += c;
    }

    /// Edmonds-Karp. Returns the set of nodes reachable from `s` in the final
    /// residual graph (the source side of a minimum cut).
    fn max_flow(&mut self, s: usize, t: usize) -> Vec<bool> {
        let n = self.n;
        loop {
            let mut parent = vec![usize::MAX; n];
            parent[s] = s;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for v in 0..n {
                    if parent[v] == usize::MAX && self.cap[u * n + v] > EPS {
                        parent[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            if parent[t] == usize::MAX {
                return parent.iter().map(|&p| p != usize::MAX).collect();
            }
            let mut bottleneck = f64::INFINITY;
            let mut v = t;
            while v != s {
                let u = parent[v];
                bottleneck = bottleneck.min(self.cap[u * n + v]);
                v = u;
            }
            let mut v = t;
            while v != s {
                let u = parent[v];
                self.cap[u * n + v] -= bottleneck;
                self.cap[v * n + u] += bottleneck;
                v = u;
            }
        }
    }
}

/// Minimum-weight vertex cover of the bipartite graph with the given vertex
/// weights and edge list `(left, right)`.
///
/// The returned cover is the one induced by the minimal source side of the
/// cut, which makes the result deterministic.
pub fn min_weight_vertex_cover(
    left_weights: &[f64],
    right_weights: &[f64],
    edges: &[(usize, usize)],
) -> Cover {
    let nl = left_weights.len();
    let nr = right_weights.len();
    let s = nl + nr;
    let t = s + 1;
    let mut net = Network::new(nl + nr + 2);
    for (i, &w) in left_weights.iter().enumerate() {
        net.add(s, i, w);
    }
    for (j, &w) in right_weights.iter().enumerate() {
        net.add(nl + j, t, w);
    }
    for &(i, j) in edges {
        net.add(i, nl + j, f64::INFINITY);
    }
    let reach = net.max_flow(s, t);
    // Left vertices cut off from the source and right vertices reachable from
    // it form the cover.
    let left: Vec<usize> = (0..nl).filter(|&i| !reach[i]).collect();
    let right: Vec<usize> = (0..nr).filter(|&j| reach[nl + j]).collect();
    let weight = left.iter().map(|&i| left_weights[i]).sum::<f64>()
        + right.iter().map(|&j| right_weights[j]).sum::<f64>();
    Cover {
        left,
        right,
        weight,
    }
}
