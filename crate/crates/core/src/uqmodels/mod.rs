//! Model problems with random inputs and their quantities of interest:
//! a linear decay ODE with a Gamma-distributed rate and a 1D elliptic
//! boundary-value problem with Gaussian coefficient parameters.

mod elliptic;
mod ode;

pub use elliptic::{
    elliptic_exact_single, elliptic_qoi_lsq, elliptic_qoi_lsq_with, elliptic_qoi_single_reference, elliptic_solve_fem, reference_qoi,
    reference_qoi_tensor_quad, EllipticCoefficient, EllipticModel, FemSolution, A_FLOOR,
};
pub use ode::{
    laguerre_func_integral, ode_qoi_lsq, ode_qoi_lsq_with, ode_qoi_reference, ode_solution, ode_solution_rk4,
    OdeModel, OdeSolveMode, RK4_STEPS,
};

use crate::lsq::Fit;

/// A least-squares QoI estimate next to its reference value.
#[derive(Debug, Clone)]
pub struct QoIResult {
    pub approx: f64,
    pub reference: f64,
    pub abs_error: f64,
    pub q: u32,
    pub n: usize,
    pub m: usize,
    pub l: f64,
    pub alpha: Vec<f64>,
    pub seed: u64,
    /// Draws rejected (and redrawn) because the model was not solvable there.
    pub rejected: usize,
    pub fit: Fit,
}

impl QoIResult {
    fn new(approx: f64, reference: f64, q: u32, l: f64, seed: u64, rejected: usize, fit: Fit) -> Self {
        Self {
            approx,
            reference,
            abs_error: (approx - reference).abs(),
            q,
            n: fit.spec.len(),
            m: fit.samples.len(),
            l,
            alpha: fit.spec.alpha().to_vec(),
            seed,
            rejected,
            fit,
        }
    }

    pub fn cond(&self) -> f64 {
        self.fit.cond()
    }
}
