use std::f64::consts::PI;

use super::{jacobi_eigen, DenseMatrix};
use crate::basis::BasisFamily;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussWeight {
    /// `e^{-y^2}` on the real line, total mass `sqrt(pi)`.
    Hermite,
    /// `e^{-y}` on the half line, total mass 1.
    Laguerre,
}

impl GaussWeight {
    pub fn mass(self) -> f64 {
        match self {
            GaussWeight::Hermite => PI.sqrt(),
            GaussWeight::Laguerre => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `sum_k w_k f(x_k)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss rule from the eigen-decomposition of the Jacobi matrix of the
/// weight's monic recurrence: nodes are the eigenvalues, weights the total
/// mass times the squared first eigenvector components.
pub fn golub_welsch(n: usize, weight: GaussWeight) -> Result<GaussRule> {
    if !(1..=128).contains(&n) {
        return Err(Error::Parameter(format!("Gauss rule size must be in 1..=128, got {n}")));
    }
    let mut j = DenseMatrix::zeros(n, n);
    for k in 0..n {
        j[(k, k)] = match weight {
            GaussWeight::Hermite => 0.0,
            GaussWeight::Laguerre => 2.0 * k as f64 + 1.0,
        };
        if k + 1 < n {
            let b = match weight {
                GaussWeight::Hermite => ((k + 1) as f64 / 2.0).sqrt(),
                GaussWeight::Laguerre => (k + 1) as f64,
            };
            j[(k, k + 1)] = b;
            j[(k + 1, k)] = b;
        }
    }
    let eig = jacobi_eigen(&j)?;
    // The eigenvector formula w_k = mass * v_{0k}^2 loses all relative
    // accuracy for the tiny weights at extreme nodes; the equivalent
    // Christoffel form 1 / sum_j p_j(x_k)^2 over orthonormal p_j does not.
    let family = match weight {
        GaussWeight::Hermite => BasisFamily::HermitePoly,
        GaussWeight::Laguerre => BasisFamily::LaguerrePoly,
    };
    let mut p = vec![0.0; n];
    let weights = eig
        .values
        .iter()
        .map(|&x| {
            family.eval_upto(x, &mut p)?;
            Ok(1.0 / p.iter().map(|v| v * v).sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(GaussRule {
        nodes: eig.values,
        weights,
    })
}
