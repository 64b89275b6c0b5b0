use std::f64::consts::PI;

use rayon::prelude::*;

use super::QoIResult;
use crate::basis::{hermite_func_integrals, BasisFamily, BasisSpec};
use crate::error::{Error, Result};
use crate::linalg::{golub_welsch, GaussWeight};
use crate::lsq::{fit, SamplingPlan, Solver};
use crate::multiindex::{build_index_set, SpaceKind};
use crate::sampling::{derive_trial_seed, draw_point, sample, Distribution, MappingSpec, SampleRng};

/// Smallest coefficient value accepted by the FEM solver.
pub const A_FLOOR: f64 = 1e-8;

/// Stream index used for redraws of rejected samples.
const REDRAW_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EllipticCoefficient {
    /// `a(x; y) = e^{c y}`, constant in `x`.
    SingleParam(f64),
    /// `a(x; y) = y0 + (y1 cos(pi x) + y2 sin(pi x)) / 2`.
    ThreeParamAffine,
    /// `a(x; y) = exp(y0 + (y1 cos(pi x) + y2 sin(pi x)) / 2)`.
    ThreeParamLognormal,
}

impl EllipticCoefficient {
    pub fn dim(&self) -> usize {
        match self {
            EllipticCoefficient::SingleParam(_) => 1,
            _ => 3,
        }
    }

    pub fn eval(&self, y: &[f64], x: f64) -> f64 {
        match *self {
            EllipticCoefficient::SingleParam(c) => (c * y[0]).exp(),
            EllipticCoefficient::ThreeParamAffine => affine(y, x),
            EllipticCoefficient::ThreeParamLognormal => affine(y, x).exp(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            EllipticCoefficient::SingleParam(c) => format!("single(c={c})"),
            EllipticCoefficient::ThreeParamAffine => "affine3".into(),
            EllipticCoefficient::ThreeParamLognormal => "lognormal3".into(),
        }
    }
}

/// Accepts the labels produced by [`EllipticCoefficient::label`]; `single`
/// alone means `c = 1`.
impl std::str::FromStr for EllipticCoefficient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parameter(format!("unknown coefficient '{s}' (single(c=..), affine3, lognormal3)"));
        match s.trim() {
            "affine3" => Ok(EllipticCoefficient::ThreeParamAffine),
            "lognormal3" => Ok(EllipticCoefficient::ThreeParamLognormal),
            "single" => Ok(EllipticCoefficient::SingleParam(1.0)),
            other => {
                let inner = other
                    .strip_prefix("single(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(bad)?;
                let c = inner.trim().strip_prefix("c=").unwrap_or(inner).trim();
                let c: f64 = c.parse().map_err(|_| bad())?;
                if !c.is_finite() {
                    return Err(bad());
                }
                Ok(EllipticCoefficient::SingleParam(c))
            }
        }
    }
}

fn affine(y: &[f64], x: f64) -> f64 {
    y[0] + 0.5 * (y[1] * (PI * x).cos() + y[2] * (PI * x).sin())
}

/// `-(a(x; y) u')' = sin(pi x)` on `(0, 1)`, `u(0) = u(1) = 0`, observed at `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModel {
    pub coefficient: EllipticCoefficient,
    pub n_elems: usize,
    pub x0: f64,
}

impl EllipticModel {
    pub fn new(coefficient: EllipticCoefficient, n_elems: usize, x0: f64) -> Result<Self> {
        if n_elems < 2 {
            return Err(Error::Parameter(format!("need at least 2 elements, got {n_elems}")));
        }
        if !(x0 > 0.0 && x0 < 1.0) {
            return Err(Error::Parameter(format!("x0 must lie in (0, 1), got {x0}")));
        }
        Ok(Self {
            coefficient,
            n_elems,
            x0,
        })
    }

    pub fn dim(&self) -> usize {
        self.coefficient.dim()
    }

    /// `u(x0; y)` from one FEM solve; non-elliptic draws are rejected.
    pub fn solve_at(&self, y: &[f64]) -> Result<f64> {
        let a = |x: f64| self.coefficient.eval(y, x);
        match elliptic_solve_fem(&a, self.n_elems) {
            Ok(sol) => Ok(sol.eval(self.x0)),
            Err(Error::CoefficientBelowFloor { .. }) => Err(Error::SampleRejected { y: y.to_vec() }),
            Err(e) => Err(e),
        }
    }
}

/// `u = e^{-c y} sin(pi x) / pi^2`.
pub fn elliptic_exact_single(c: f64, y: f64, x: f64) -> f64 {
    (-c * y).exp() * (PI * x).sin() / (PI * PI)
}

/// `int e^{-y^2/2} u(x0, y)^2 dy = sqrt(2 pi) e^{2c^2} sin^2(pi x0) / pi^4`.
pub fn elliptic_qoi_single_reference(c: f64, x0: f64) -> f64 {
    (2.0 * PI).sqrt() * (2.0 * c * c).exp() * (PI * x0).sin().powi(2) / PI.powi(4)
}

/// Nodal values of a P1 finite element solution on a uniform mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct FemSolution {
    values: Vec<f64>,
}

impl FemSolution {
    /// Values at `x_i = i / n_elems`, boundary nodes included.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_elems(&self) -> usize {
        self.values.len() - 1
    }

    /// Piecewise-linear interpolant.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.n_elems();
        let s = (x.clamp(0.0, 1.0) * n as f64).min(n as f64);
        let e = (s.floor() as usize).min(n - 1);
        let t = s - e as f64;
        (1.0 - t) * self.values[e] + t * self.values[e + 1]
    }
}

pub fn elliptic_solve_fem(a_of_x: &dyn Fn(f64) -> f64, n_elems: usize) -> Result<FemSolution> {
    if n_elems < 2 {
        return Err(Error::Parameter(format!("need at least 2 elements, got {n_elems}")));
    }
    let n = n_elems;
    let h = 1.0 / n as f64;
    let a: Vec<f64> = (0..n)
        .map(|e| {
            let x = (e as f64 + 0.5) * h;
            let v = a_of_x(x);
            if v > A_FLOOR {
                Ok(v)
            } else {
                Err(Error::CoefficientBelowFloor { x, value: v })
            }
        })
        .collect::<Result<_>>()?;

    // Load vector: two-point Gauss per element against the hat functions.
    let g = 0.5 / 3f64.sqrt();
    let mut load = vec![0.0; n + 1];
    for e in 0..n {
        let x_left = e as f64 * h;
        for s in [0.5 - g, 0.5 + g] {
            let f = (PI * (x_left + s * h)).sin() * 0.5 * h;
            load[e] += f * (1.0 - s);
            load[e + 1] += f * s;
        }
    }

    // Interior system for nodes 1..n-1: diag (a_{i-1} + a_i)/h, off-diag -a_i/h.
    let k = n - 1;
    let diag: Vec<f64> = (1..n).map(|i| (a[i - 1] + a[i]) / h).collect();
    let off: Vec<f64> = (1..n - 1).map(|i| -a[i] / h).collect();
    let rhs = &load[1..n];
    let interior = thomas(&off, &diag, &off, rhs, k);

    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    values.extend(interior);
    values.push(0.0);
    Ok(FemSolution { values })
}

/// Tridiagonal solve; `lower[i]` couples rows `i+1` and `i`.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { upper[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// Solves the model at every sample (in parallel), redrawing rejected points
/// from a dedicated stream until all are solvable. Returns values and the
/// rejection count. Order and redraws depend only on `seed`.
fn solve_with_redraws(
    model: &EllipticModel,
    points: &mut crate::sampling::SampleSet,
    seed: u64,
) -> Result<(Vec<f64>, usize)> {
    let m = points.len();
    let d = points.dim();
    let dist = *points.distribution();
    let cap = m.max(100);
    let mut redraw = SampleRng::new(derive_trial_seed(seed, REDRAW_STREAM));
    let mut u: Vec<Option<f64>> = vec![None; m];
    let mut pending: Vec<usize> = (0..m).collect();
    let mut rejected = 0usize;
    loop {
        let results: Vec<Result<f64>> = pending.par_iter().map(|&k| model.solve_at(points.point(k))).collect();
        let mut still = Vec::new();
        for (&k, r) in pending.iter().zip(results) {
            match r {
                Ok(v) => u[k] = Some(v),
                Err(Error::SampleRejected { .. }) => still.push(k),
                Err(e) => return Err(e),
            }
        }
        if still.is_empty() {
            break;
        }
        rejected += still.len();
        if rejected > cap {
            return Err(Error::RejectionCap {
                rejected,
                drawn: m + rejected,
            });
        }
        let mut buf = vec![0.0; d];
        for &k in &still {
            draw_point(&mut redraw, &dist, &mut buf);
            points.replace_point(k, &buf);
        }
        pending = still;
    }
    Ok((u.into_iter().map(|v| v.expect("every sample solved")).collect(), rejected))
}

/// Fits `e^{-|y|^2/2} u(x0, y)^2` in unscaled Hermite functions (total
/// degree `q`) on logarithmically mapped points and integrates termwise.
pub fn elliptic_qoi_lsq(model: &EllipticModel, q: u32, plan: &SamplingPlan, l: f64, seed: u64) -> Result<QoIResult> {
    elliptic_qoi_lsq_with(model, q, plan, l, seed, Solver::Qr, None)
}

/// As [`elliptic_qoi_lsq`], with a solver choice and an optional
/// precomputed reference (computed via [`reference_qoi`] when absent).
pub fn elliptic_qoi_lsq_with(
    model: &EllipticModel,
    q: u32,
    plan: &SamplingPlan,
    l: f64,
    seed: u64,
    solver: Solver,
    reference: Option<f64>,
) -> Result<QoIResult> {
    let reference = match reference {
        Some(r) => r,
        None => reference_qoi(model)?,
    };
    let d = model.dim();
    let set = build_index_set(SpaceKind::TotalDegree, q, d)?;
    let m = plan.sample_count(set.len())?;
    let mut points = sample(Distribution::MappedUniform(MappingSpec::logarithmic(l)?), m, d, seed)?;
    let (u, rejected) = solve_with_redraws(model, &mut points, seed)?;
    let values: Vec<f64> = points
        .rows()
        .zip(&u)
        .map(|(y, u)| (-0.5 * y.iter().map(|v| v * v).sum::<f64>()).exp() * u * u)
        .collect();
    let spec = BasisSpec::unscaled(BasisFamily::HermiteFunc, set);
    let fitted = fit(&spec, &points, &values, solver)?;
    let j = hermite_func_integrals(q as usize + 1);
    let approx = spec
        .index_set()
        .iter()
        .zip(&fitted.coefficients)
        .map(|(n, c)| c * n.entries().iter().map(|&k| j[k as usize]).product::<f64>())
        .sum();
    Ok(QoIResult::new(approx, reference, q, l, seed, rejected, fitted))
}

/// Tensor Gauss rule for `int e^{-|y|^2/2} u(x0, y)^2 dy` at `nodes_per_dim`
/// and `nodes_per_dim - 5` points per direction; the finer value is returned
/// once both agree to 1e-8 relative.
pub fn reference_qoi_tensor_quad(model: &EllipticModel, nodes_per_dim: usize) -> Result<f64> {
    if !(6..=40).contains(&nodes_per_dim) {
        return Err(Error::Parameter(format!(
            "nodes_per_dim must lie in 6..=40, got {nodes_per_dim}"
        )));
    }
    if model.coefficient == EllipticCoefficient::ThreeParamAffine {
        // a(x; y) is Gaussian in y, so it vanishes with positive density and
        // E[1/|a|] (hence E[u(x0)]) is infinite.
        return Err(Error::DivergentQoi(
            "affine coefficient changes sign with positive probability; E[u(x0)] is infinite".into(),
        ));
    }
    let coarse = tensor_quad(model, nodes_per_dim - 5)?;
    let fine = tensor_quad(model, nodes_per_dim)?;
    let rel_diff = (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE);
    if rel_diff > 1e-8 {
        return Err(Error::ReferenceNotConverged {
            coarse,
            fine,
            rel_diff,
        });
    }
    Ok(fine)
}

/// Closed form for the single-parameter model, tensor quadrature otherwise.
pub fn reference_qoi(model: &EllipticModel) -> Result<f64> {
    match model.coefficient {
        EllipticCoefficient::SingleParam(c) => Ok(elliptic_qoi_single_reference(c, model.x0)),
        _ => reference_qoi_tensor_quad(model, 25),
    }
}

fn tensor_quad(model: &EllipticModel, n: usize) -> Result<f64> {
    // Weight e^{-y^2/2} from the e^{-x^2} rule via y = sqrt(2) x.
    let rule = golub_welsch(n, GaussWeight::Hermite)?;
    let nodes: Vec<f64> = rule.nodes.iter().map(|x| x * std::f64::consts::SQRT_2).collect();
    let weights: Vec<f64> = rule.weights.iter().map(|w| w * std::f64::consts::SQRT_2).collect();
    let d = model.dim();
    let total = n.pow(d as u32);
    let terms: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|mut code| {
            let mut y = vec![0.0; d];
            let mut w = 1.0;
            for yi in y.iter_mut() {
                let i = code % n;
                code /= n;
                *yi = nodes[i];
                w *= weights[i];
            }
            model.solve_at(&y).map(|u| w * u * u)
        })
        .collect::<Result<_>>()?;
    // Fixed summation order regardless of scheduling.
    Ok(terms.iter().sum())
}
