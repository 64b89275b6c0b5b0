use super::QoIResult;
use crate::basis::BasisFamily;
use crate::error::{Error, Result};
use crate::lsq::{apply_scaling, fit, SamplingPlan, ScalingRule, Solver};
use crate::multiindex::{build_index_set, SpaceKind};
use crate::sampling::{sample, Distribution, MappingSpec};

pub const RK4_STEPS: usize = 1000;

/// `df/dt = -beta y f`, `f(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeModel {
    pub beta: f64,
    pub t: f64,
}

impl OdeModel {
    pub fn new(beta: f64, t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0 && beta.is_finite()) {
            return Err(Error::Parameter(format!("need finite beta and t >= 0, got beta={beta}, t={t}")));
        }
        Ok(Self { beta, t })
    }

    /// Exponent `1 + 2 beta t` of the weighted squared solution.
    pub fn decay_rate(&self) -> f64 {
        1.0 + 2.0 * self.beta * self.t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OdeSolveMode {
    #[default]
    Analytic,
    /// Fixed-step RK4, one integration per sample.
    Rk4,
}

impl OdeSolveMode {
    pub fn as_str(self) -> &'static str {
        match self {
            OdeSolveMode::Analytic => "analytic",
            OdeSolveMode::Rk4 => "rk4",
        }
    }
}

impl std::str::FromStr for OdeSolveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(OdeSolveMode::Analytic),
            "rk4" => Ok(OdeSolveMode::Rk4),
            _ => Err(Error::Parameter(format!("unknown ode mode '{s}' (analytic, rk4)"))),
        }
    }
}

pub fn ode_solution(t: f64, y: f64, beta: f64) -> f64 {
    (-beta * y * t).exp()
}

pub fn ode_solution_rk4(t: f64, y: f64, beta: f64, steps: usize) -> f64 {
    let h = t / steps as f64;
    let k = beta * y;
    let rhs = |f: f64| -k * f;
    let mut f = 1.0;
    for _ in 0..steps {
        let k1 = rhs(f);
        let k2 = rhs(f + 0.5 * h * k1);
        let k3 = rhs(f + 0.5 * h * k2);
        let k4 = rhs(f + h * k3);
        f += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    f
}

/// `int_0^inf e^{-y} f(t, y)^2 dy = 1 / (1 + 2 beta t)`.
pub fn ode_qoi_reference(t: f64, beta: f64) -> Result<f64> {
    let rate = 1.0 + 2.0 * beta * t;
    if rate <= 0.0 {
        return Err(Error::DivergentQoi(format!(
            "1 + 2 beta t = {rate} <= 0 (beta = {beta}, t = {t})"
        )));
    }
    Ok(1.0 / rate)
}

/// `int_0^inf L~_n(y) dy = 2 (-1)^n`.
pub fn laguerre_func_integral(n: usize) -> f64 {
    if n % 2 == 0 {
        2.0
    } else {
        -2.0
    }
}

pub fn ode_qoi_lsq(
    model: &OdeModel,
    q: u32,
    plan: &SamplingPlan,
    l: f64,
    rule: &ScalingRule,
    seed: u64,
) -> Result<QoIResult> {
    ode_qoi_lsq_with(model, q, plan, l, rule, seed, OdeSolveMode::Analytic, Solver::Qr)
}

/// Fits `e^{-y} f(t, y)^2` with scaled Laguerre functions on algebraically
/// mapped points and integrates the expansion termwise.
#[allow(clippy::too_many_arguments)]
pub fn ode_qoi_lsq_with(
    model: &OdeModel,
    q: u32,
    plan: &SamplingPlan,
    l: f64,
    rule: &ScalingRule,
    seed: u64,
    mode: OdeSolveMode,
    solver: Solver,
) -> Result<QoIResult> {
    let reference = ode_qoi_reference(model.t, model.beta)?;
    let set = build_index_set(SpaceKind::TotalDegree, q, 1)?;
    let m = plan.sample_count(set.len())?;
    let drawn = sample(Distribution::MappedUniform(MappingSpec::algebraic(l)?), m, 1, seed)?;
    let (spec, points) = apply_scaling(BasisFamily::LaguerreFunc, set, &drawn, rule)?;
    let values: Vec<f64> = points
        .rows()
        .map(|p| {
            let y = p[0];
            let f = match mode {
                OdeSolveMode::Analytic => ode_solution(model.t, y, model.beta),
                OdeSolveMode::Rk4 => ode_solution_rk4(model.t, y, model.beta, RK4_STEPS),
            };
            (-y).exp() * f * f
        })
        .collect();
    let fitted = fit(&spec, &points, &values, solver)?;
    let alpha = spec.alpha()[0];
    let approx = fitted
        .coefficients
        .iter()
        .enumerate()
        .map(|(n, c)| c * laguerre_func_integral(n))
        .sum::<f64>()
        / alpha;
    Ok(QoIResult::new(approx, reference, q, l, seed, 0, fitted))
}
