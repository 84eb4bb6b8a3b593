//! Gauss-Hermite quadrature, used by the truth oracles.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights for the weight function `exp(-t^2)` on the real line,
/// computed by the Golub-Welsch eigenvalue method. Weights sum to sqrt(pi).
pub fn hermite_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut jacobi = DMatrix::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            (node, sqrt_pi * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Quadrature rule for expectations under `N(mean, sd^2)`: nodes are
/// `mean + sqrt(2) sd t`, weights are normalized to sum to one.
pub fn gaussian_rule(mean: f64, sd: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = hermite_rule(n);
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    let nodes = t.iter().map(|&ti| mean + std::f64::consts::SQRT_2 * sd * ti).collect();
    let weights = w.iter().map(|&wi| wi * inv_sqrt_pi).collect();
    (nodes, weights)
}
