//! Classical (Torgerson) multidimensional scaling.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::matrix::DistanceMatrix;

/// Coordinates in `dim` dimensions from the top eigenpairs of the
/// double-centred squared distances. Negative eigenvalues contribute zero.
/// Each axis is signed so its largest-magnitude entry is positive.
pub fn classical_mds(target: &DistanceMatrix, dim: usize) -> Vec<Vec<f64>> {
    let n = target.len();
    if n == 0 {
        return vec![];
    }
    let sq = DMatrix::from_fn(n, n, |i, j| target.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut coords = vec![vec![0.0; dim]; n];
    for (axis, &e) in order.iter().take(dim).enumerate() {
        let lambda = eig.eigenvalues[e];
        if !(lambda > 0.0) {
            continue;
        }
        let v = eig.eigenvectors.column(e);
        let mut pivot = 0;
        for i in 1..n {
            if v[i].abs() > v[pivot].abs() {
                pivot = i;
            }
        }
        let s = lambda.sqrt() * v[pivot].signum();
        for i in 0..n {
            coords[i][axis] = v[i] * s;
        }
    }
    coords
}
