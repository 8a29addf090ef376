//! Exact quadrature for the Haar probability measure.
//!
//! Product rule in Z-Y-Z Euler angles: uniform nodes in the two outer angles
//! kill every nonzero Fourier mode up to the band limit, which leaves only
//! Legendre polynomials in `cos(beta)` for Gauss-Legendre to integrate.

use super::rotation::Rotation;
use std::f64::consts::PI;

/// Nodes and non-negative weights summing to one.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<Rotation>,
    weights: Vec<f64>,
    band_limit: usize,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[Rotation] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The largest degree whose block-matrix entries integrate exactly.
    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Rotation, f64)> {
        self.nodes.iter().zip(self.weights.iter().copied())
    }

    pub fn integrate<F: FnMut(&Rotation) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(r, w)| w * f(r)).sum()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre recurrence. Weights sum to 2.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi-style initial guess, then Newton.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Recompute weights in sorted order.
    for i in 0..n {
        let (_, dp) = legendre_with_derivative(n, nodes[i]);
        weights[i] = 2.0 / ((1.0 - nodes[i] * nodes[i]) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Builds a rule exact for all block-matrix entries of degree `<= band_limit`.
///
/// Sizes: `2 band_limit + 2` uniform nodes in each outer angle, `band_limit + 1`
/// Gauss-Legendre nodes in `cos(beta)`.
pub fn haar_quadrature(band_limit: usize) -> QuadratureRule {
    let n_outer = 2 * band_limit + 2;
    let (beta_nodes, beta_weights) = gauss_legendre(band_limit + 1);
    let mut nodes = Vec::with_capacity(n_outer * n_outer * beta_nodes.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    let w_outer = 1.0 / n_outer as f64;
    for ia in 0..n_outer {
        let alpha = 2.0 * PI * ia as f64 / n_outer as f64;
        for (bu, bw) in beta_nodes.iter().zip(beta_weights.iter()) {
            let beta = bu.clamp(-1.0, 1.0).acos();
            for ig in 0..n_outer {
                let gamma = 2.0 * PI * ig as f64 / n_outer as f64;
                nodes.push(Rotation::from_euler_zyz(alpha, beta, gamma));
                weights.push(w_outer * w_outer * bw / 2.0);
            }
        }
    }
    QuadratureRule { nodes, weights, band_limit }
}
