//! Gauss-Hermite quadrature for expectations under a standard normal.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::linalg::sym_eigen;

/// Nodes and weights for ∫ g(x) e^{-x²} dx ≈ Σ wᵢ g(xᵢ).
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds the rule of the given order. Eigenvalues of the Jacobi matrix
    /// seed a Newton polish on the orthonormal Hermite recurrence, which
    /// also yields the weights.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(invalid("quadrature order must be positive"));
        }
        let n = order;
        let jacobi = DMatrix::from_fn(n, n, |i, j| {
            if i.abs_diff(j) == 1 {
                (i.max(j) as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let guesses = sym_eigen(&jacobi).values;
        let pim4 = PI.powf(-0.25);
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Only the non-negative half is polished; the rule is mirrored.
        for i in 0..n.div_ceil(2) {
            let mut z = guesses[i];
            let mut deriv = 0.0;
            for _ in 0..100 {
                let (mut p1, mut p2) = (pim4, 0.0);
                for j in 1..=n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                }
                deriv = (2.0 * nf).sqrt() * p2;
                let prev = z;
                z = prev - p1 / deriv;
                if (z - prev).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (deriv * deriv);
            weights[n - 1 - i] = weights[i];
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        nodes.reverse();
        weights.reverse();
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// E[g(Z)] for Z ~ N(0, 1).
    pub fn expect<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let scale = std::f64::consts::SQRT_2;
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(scale * x))
            .sum();
        sum / PI.sqrt()
    }
}
