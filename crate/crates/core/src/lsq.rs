//! Discrete least-squares fitting: design matrices, sample-count rules,
//! scaling-factor selection, fitted expansions and their errors.

use crate::basis::{BasisFamily, BasisSpec};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, gram, qr_least_squares, stable_norm, sym_eigs, DenseMatrix, SpectralDiagnostics};
use crate::multiindex::IndexSet;
use crate::sampling::{sample, SampleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlanRule {
    /// `m = ceil(c N)`
    Linear,
    /// `m = ceil(c N^2)`
    Quadratic,
}

impl std::str::FromStr for PlanRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(PlanRule::Linear),
            "quadratic" => Ok(PlanRule::Quadratic),
            other => Err(Error::Parameter(format!("unknown sampling rule '{other}'"))),
        }
    }
}

impl PlanRule {
    pub fn as_str(self) -> &'static str {
        match self {
            PlanRule::Linear => "linear",
            PlanRule::Quadratic => "quadratic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingPlan {
    pub rule: PlanRule,
    pub c: f64,
}

impl SamplingPlan {
    pub fn new(rule: PlanRule, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Parameter(format!("sampling multiplier c must be positive, got {c}")));
        }
        Ok(Self { rule, c })
    }

    pub fn linear(c: f64) -> Result<Self> {
        Self::new(PlanRule::Linear, c)
    }

    pub fn quadratic(c: f64) -> Result<Self> {
        Self::new(PlanRule::Quadratic, c)
    }

    /// Number of samples for a space of dimension `n`; always at least `n + 1`.
    pub fn sample_count(&self, n: usize) -> Result<usize> {
        let nf = n as f64;
        let raw = match self.rule {
            PlanRule::Linear => (self.c * nf).ceil(),
            PlanRule::Quadratic => (self.c * nf * nf).ceil(),
        };
        if !(raw < usize::MAX as f64 / 2.0) {
            return Err(Error::Capacity(format!("sample count {raw:e} for N = {n}")));
        }
        Ok((raw as usize).max(n + 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalingKind {
    None,
    Maximum,
    Quantile,
}

impl ScalingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalingKind::None => "none",
            ScalingKind::Maximum => "maximum",
            ScalingKind::Quantile => "quantile",
        }
    }
}

impl std::str::FromStr for ScalingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(ScalingKind::None),
            "maximum" | "max" => Ok(ScalingKind::Maximum),
            "quantile" => Ok(ScalingKind::Quantile),
            other => Err(Error::Parameter(format!("unknown scaling rule '{other}'"))),
        }
    }
}

/// How to pick per-dimension scaling factors from the drawn points.
///
/// `radius` is the effective support `M` of the target; `mu` is the kept
/// fraction for the quantile rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRule {
    pub kind: ScalingKind,
    pub radius: f64,
    pub mu: f64,
}

impl ScalingRule {
    pub fn none() -> Self {
        Self {
            kind: ScalingKind::None,
            radius: 1.0,
            mu: 1.0,
        }
    }

    pub fn maximum(radius: f64) -> Result<Self> {
        Self::new(ScalingKind::Maximum, radius, 1.0)
    }

    pub fn quantile(radius: f64, mu: f64) -> Result<Self> {
        Self::new(ScalingKind::Quantile, radius, mu)
    }

    pub fn new(kind: ScalingKind, radius: f64, mu: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Parameter(format!("support radius M must be positive, got {radius}")));
        }
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::Parameter(format!("quantile level mu must lie in (0, 1], got {mu}")));
        }
        Ok(Self { kind, radius, mu })
    }
}

/// Per-dimension scaling factors `alpha_i = |y_i|_(j) / M` where `j` is the
/// last order statistic (maximum rule) or the 1-based `floor(mu m)`-th one.
pub fn select_scaling(samples: &SampleSet, rule: &ScalingRule) -> Result<Vec<f64>> {
    let d = samples.dim();
    let m = samples.len();
    let rank = match rule.kind {
        ScalingKind::None => return Ok(vec![1.0; d]),
        ScalingKind::Maximum => m,
        ScalingKind::Quantile => (rule.mu * m as f64).floor() as usize,
    };
    if rank < 1 || rank > m {
        return Err(Error::Parameter(format!(
            "order statistic {rank} out of range for m = {m} (mu = {})",
            rule.mu
        )));
    }
    (0..d)
        .map(|i| {
            let mut abs: Vec<f64> = samples.column(i).map(f64::abs).collect();
            abs.sort_by(f64::total_cmp);
            let alpha = abs[rank - 1] / rule.radius;
            if alpha > 0.0 && alpha.is_finite() {
                Ok(alpha)
            } else {
                Err(Error::Parameter(format!("degenerate scaling factor {alpha} in dimension {i}")))
            }
        })
        .collect()
}

/// Scaled basis and target-frame samples for a scaling rule.
///
/// The drawn points live in the basis frame. With factors `alpha`, the
/// target is sampled at `y / alpha` and the basis is `Phi(alpha * z)`, so the
/// design matrix is the one the stable draws were made for while the target
/// is compressed onto its effective support.
pub fn apply_scaling(
    family: BasisFamily,
    index_set: IndexSet,
    drawn: &SampleSet,
    rule: &ScalingRule,
) -> Result<(BasisSpec, SampleSet)> {
    let alpha = select_scaling(drawn, rule)?;
    let target_frame = drawn.rescaled(&alpha)?;
    Ok((BasisSpec::new(family, index_set, alpha)?, target_frame))
}

/// `D[k][j] = Phi_j(alpha * y_k)`.
pub fn assemble_design(spec: &BasisSpec, samples: &SampleSet) -> Result<DenseMatrix> {
    if samples.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: samples.dim(),
        });
    }
    let n = spec.len();
    let mut data = vec![0.0; samples.len() * n];
    let mut eval = spec.row_evaluator();
    for (row, point) in data.chunks_exact_mut(n).zip(samples.rows()) {
        eval.eval_into(point, row)?;
    }
    DenseMatrix::new(samples.len(), n, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Solver {
    #[default]
    Qr,
    Cholesky,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Qr => "qr",
            Solver::Cholesky => "cholesky",
        }
    }
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qr" => Ok(Solver::Qr),
            "cholesky" => Ok(Solver::Cholesky),
            other => Err(Error::Parameter(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fit {
    pub spec: BasisSpec,
    pub coefficients: Vec<f64>,
    pub samples: SampleSet,
    /// Right-hand side the fit was computed from.
    pub values: Vec<f64>,
    /// Spectrum of `A = D^T D`.
    pub diagnostics: SpectralDiagnostics,
    pub residual_norm: f64,
    pub solver: Solver,
}

impl Fit {
    /// `sum_n c_n Phi_n(alpha * z)`.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        let mut row = vec![0.0; self.spec.len()];
        self.spec.row_evaluator().eval_into(point, &mut row)?;
        Ok(crate::linalg::dot(&row, &self.coefficients))
    }

    pub fn eval_many(&self, samples: &SampleSet) -> Result<Vec<f64>> {
        let mut row = vec![0.0; self.spec.len()];
        let mut eval = self.spec.row_evaluator();
        samples
            .rows()
            .map(|p| {
                eval.eval_into(p, &mut row)?;
                Ok(crate::linalg::dot(&row, &self.coefficients))
            })
            .collect()
    }

    pub fn cond(&self) -> f64 {
        self.diagnostics.cond
    }

    /// QR-versus-Cholesky relative coefficient difference on this fit's
    /// data; see [`solver_agreement`].
    pub fn cross_check(&self, cond_limit: f64) -> Result<Option<f64>> {
        solver_agreement(&self.spec, &self.samples, &self.values, cond_limit)
    }
}

fn fit_context(spec: &BasisSpec, samples: &SampleSet) -> String {
    format!(
        "{} {} q={} d={}, m={}, N={}, seed={}",
        spec.family().as_str(),
        spec.index_set().kind().as_str(),
        spec.index_set().order(),
        spec.dim(),
        samples.len(),
        spec.len(),
        samples.seed()
    )
}

pub fn fit(spec: &BasisSpec, samples: &SampleSet, values: &[f64], solver: Solver) -> Result<Fit> {
    let wrap = |e: Error| Error::Fit {
        context: fit_context(spec, samples),
        source: Box::new(e),
    };
    if values.len() != samples.len() {
        return Err(wrap(Error::DimensionMismatch {
            expected: samples.len(),
            got: values.len(),
        }));
    }
    if samples.len() < spec.len() {
        return Err(wrap(Error::Parameter(format!(
            "need m >= N, got m = {} < N = {}",
            samples.len(),
            spec.len()
        ))));
    }
    let d = assemble_design(spec, samples).map_err(wrap)?;
    let a = gram(&d);
    let diagnostics = sym_eigs(&a).map_err(wrap)?;
    let coefficients = match solver {
        Solver::Qr => qr_least_squares(&d, values),
        Solver::Cholesky => cholesky_solve(&a, &d.tr_matvec(values)),
    }
    .map_err(wrap)?;
    let residual: Vec<f64> = d.matvec(&coefficients).iter().zip(values).map(|(p, b)| p - b).collect();
    Ok(Fit {
        spec: spec.clone(),
        coefficients,
        samples: samples.clone(),
        values: values.to_vec(),
        diagnostics,
        residual_norm: stable_norm(&residual),
        solver,
    })
}

/// Relative 2-norm difference between QR and Cholesky coefficients, or
/// `None` when `cond(A)` is at least `cond_limit` (the normal equations are
/// not expected to agree there).
pub fn solver_agreement(spec: &BasisSpec, samples: &SampleSet, values: &[f64], cond_limit: f64) -> Result<Option<f64>> {
    let qr = fit(spec, samples, values, Solver::Qr)?;
    if qr.diagnostics.cond >= cond_limit {
        return Ok(None);
    }
    let ch = fit(spec, samples, values, Solver::Cholesky)?;
    let diff: Vec<f64> = qr.coefficients.iter().zip(&ch.coefficients).map(|(a, b)| a - b).collect();
    let scale = stable_norm(&qr.coefficients);
    Ok(Some(if scale > 0.0 { stable_norm(&diff) / scale } else { stable_norm(&diff) }))
}

pub const DEFAULT_EVAL_POINTS: usize = 4000;

/// Maximum of `|fit(z) - target(z)|` over `n_eval` fresh points drawn from
/// the fit's own sampling law (in the fit's frame) with `eval_seed`.
pub fn linf_error(fit: &Fit, target: &dyn Fn(&[f64]) -> f64, n_eval: usize, eval_seed: u64) -> Result<f64> {
    let drawn = sample(*fit.samples.distribution(), n_eval, fit.samples.dim(), eval_seed)?;
    let grid = drawn.rescaled(fit.samples.frame_scale())?;
    let approx = fit.eval_many(&grid)?;
    Ok(grid
        .rows()
        .zip(approx)
        .map(|(z, p)| (p - target(z)).abs())
        .fold(0.0, f64::max))
}

/// `abar_ij = int (1 - tanh^2(y/L)) H~_i(y) H~_j(y) dy` for `i, j < k`: the
/// expectation of `(2L/m) D^T D` under the logarithmic map.
pub fn expected_gram(k: usize, l: f64) -> Result<DenseMatrix> {
    if k == 0 || k > 64 {
        return Err(Error::Parameter(format!("expected_gram needs 1 <= K <= 64, got {k}")));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::Parameter(format!("L must be positive, got {l}")));
    }
    // Beyond sqrt(2K+1) + 40 every H~_i is below 1e-300; the nominal window
    // [-20L, 20L] is cut there.
    let y_max = (20.0 * l).min((2.0 * k as f64 + 1.0).sqrt() + 40.0);
    let intervals = 2 * (y_max / 0.005 / 2.0).ceil() as usize;
    let h = 2.0 * y_max / intervals as f64;
    let mut acc = vec![0.0; k * k];
    let mut buf = vec![0.0; k];
    for s in 0..=intervals {
        let y = -y_max + s as f64 * h;
        let w = if s == 0 || s == intervals {
            1.0
        } else if s % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let t = (y / l).tanh();
        let w = w * (1.0 - t * t);
        BasisFamily::HermiteFunc.eval_upto(y, &mut buf)?;
        for i in 0..k {
            let wi = w * buf[i];
            for j in i..k {
                acc[i * k + j] += wi * buf[j];
            }
        }
    }
    for i in 0..k {
        for j in i..k {
            let v = acc[i * k + j] * h / 3.0;
            acc[i * k + j] = v;
            acc[j * k + i] = v;
        }
    }
    DenseMatrix::new(k, k, acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::{build_index_set, SpaceKind};
    use crate::sampling::{Distribution, MappingSpec};

    fn spec_1d(family: BasisFamily, q: u32) -> BasisSpec {
        BasisSpec::unscaled(family, build_index_set(SpaceKind::TotalDegree, q, 1).unwrap())
    }

    fn pts(v: &[f64]) -> SampleSet {
        SampleSet::from_points(v.to_vec(), 1, Distribution::UniformSym, 0).unwrap()
    }

    #[test]
    fn plan_counts() {
        let lin = SamplingPlan::linear(6.0).unwrap();
        assert_eq!(lin.sample_count(26).unwrap(), 156);
        let quad = SamplingPlan::quadratic(3.0).unwrap();
        assert_eq!(quad.sample_count(16).unwrap(), 768);
        // Lifted above N.
        assert_eq!(SamplingPlan::linear(1.0).unwrap().sample_count(10).unwrap(), 11);
        assert_eq!(SamplingPlan::linear(0.1).unwrap().sample_count(10).unwrap(), 11);
        assert!(SamplingPlan::linear(0.0).is_err());
    }

    #[test]
    fn scaling_examples() {
        let s = pts(&[1.0, 2.0, 3.0]);
        assert_eq!(select_scaling(&s, &ScalingRule::maximum(3.0).unwrap()).unwrap(), [1.0]);
        let s = pts(&[1.0, -2.0, 3.0, 30.0]);
        assert_eq!(select_scaling(&s, &ScalingRule::quantile(3.0, 0.75).unwrap()).unwrap(), [1.0]);
        assert_eq!(select_scaling(&s, &ScalingRule::none()).unwrap(), [1.0]);
        let tiny = ScalingRule::quantile(3.0, 0.2).unwrap();
        assert!(matches!(select_scaling(&s, &tiny), Err(Error::Parameter(_))));
    }

    #[test]
    fn scaling_is_per_dimension() {
        let s = SampleSet::from_points(vec![1.0, 10.0, -2.0, 20.0, 4.0, -40.0], 2, Distribution::Gaussian, 0).unwrap();
        let a = select_scaling(&s, &ScalingRule::maximum(2.0).unwrap()).unwrap();
        assert_eq!(a, [2.0, 20.0]);
    }

    #[test]
    fn design_for_constant_hermite_function() {
        let y = [-1.5, 0.0, 0.3, 2.0];
        let d = assemble_design(&spec_1d(BasisFamily::HermiteFunc, 0), &pts(&y)).unwrap();
        assert_eq!(d.cols(), 1);
        for (k, &yk) in y.iter().enumerate() {
            let expect = crate::basis::PI_POW_NEG_QUARTER * (-0.5 * yk * yk).exp();
            assert!((d[(k, 0)] - expect).abs() <= 1e-15 * expect);
        }
    }

    #[test]
    fn unit_alpha_matches_unscaled_bitwise() {
        let set = build_index_set(SpaceKind::TotalDegree, 4, 2).unwrap();
        let s = sample(Distribution::Gaussian, 30, 2, 5).unwrap();
        let a = assemble_design(&BasisSpec::unscaled(BasisFamily::HermiteFunc, set.clone()), &s).unwrap();
        let b = assemble_design(&BasisSpec::new(BasisFamily::HermiteFunc, set, vec![1.0, 1.0]).unwrap(), &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn square_design_is_nonsingular() {
        for q in 0..=5u32 {
            let y: Vec<f64> = (0..=q).map(|i| -1.0 + 0.37 * i as f64).collect();
            let d = assemble_design(&spec_1d(BasisFamily::HermitePoly, q), &pts(&y)).unwrap();
            // Gaussian elimination determinant.
            let n = d.rows();
            let mut m: Vec<Vec<f64>> = (0..n).map(|i| d.row(i).to_vec()).collect();
            let mut det = 1.0;
            for c in 0..n {
                let p = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
                m.swap(c, p);
                det *= m[c][c];
                for r in c + 1..n {
                    let f = m[r][c] / m[c][c];
                    for k in c..n {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
            assert!(det.abs() > 1e-8, "q={q}: det={det}");
        }
    }

    #[test]
    fn laguerre_design_rejects_negative_points() {
        let e = assemble_design(&spec_1d(BasisFamily::LaguerreFunc, 2), &pts(&[1.0, -0.5])).unwrap_err();
        assert!(matches!(e, Error::Domain { coord: 0, .. }));
    }

    #[test]
    fn span_exactness_both_solvers() {
        let set = build_index_set(SpaceKind::TotalDegree, 5, 2).unwrap();
        let spec = BasisSpec::unscaled(BasisFamily::HermiteFunc, set);
        let s = sample(Distribution::MappedUniform(MappingSpec::logarithmic(4.0).unwrap()), 200, 2, 11).unwrap();
        let c0: Vec<f64> = (0..spec.len()).map(|i| ((i * 7 % 5) as f64 - 2.0) / (1.0 + i as f64)).collect();
        let b = assemble_design(&spec, &s).unwrap().matvec(&c0);
        for solver in [Solver::Qr, Solver::Cholesky] {
            let f = fit(&spec, &s, &b, solver).unwrap();
            for (c, e) in f.coefficients.iter().zip(&c0) {
                assert!((c - e).abs() <= 1e-9 * e.abs().max(1e-3), "{solver:?}: {c} vs {e}");
            }
            assert!(f.residual_norm <= 1e-10);
        }
    }

    #[test]
    fn square_fit_interpolates() {
        let y = [-1.2, -0.4, 0.1, 0.9, 1.7];
        let spec = spec_1d(BasisFamily::HermiteFunc, 4);
        let b: Vec<f64> = y.iter().map(|v: &f64| (v * 1.3).sin()).collect();
        let f = fit(&spec, &pts(&y), &b, Solver::Qr).unwrap();
        assert!(f.residual_norm <= 1e-10 * stable_norm(&b));
        for (yk, bk) in y.iter().zip(&b) {
            assert!((f.eval(&[*yk]).unwrap() - bk).abs() <= 1e-9 * bk.abs().max(1e-12));
        }
    }

    #[test]
    fn fit_errors_carry_context() {
        let spec = spec_1d(BasisFamily::HermitePoly, 2);
        let e = fit(&spec, &pts(&[0.0, 1.0, 1.0]), &[1.0, 2.0, 2.0], Solver::Qr).unwrap_err();
        match e {
            Error::Fit { context, source } => {
                assert!(context.contains("m=3") && context.contains("N=3"), "{context}");
                assert!(matches!(*source, Error::RankDeficient { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(fit(&spec, &pts(&[0.0, 1.0]), &[1.0, 2.0], Solver::Qr).is_err());
        assert!(fit(&spec, &pts(&[0.0, 1.0, 2.0]), &[1.0], Solver::Qr).is_err());
    }

    #[test]
    fn linf_error_in_span_and_deterministic() {
        let spec = spec_1d(BasisFamily::HermiteFunc, 3);
        let s = sample(Distribution::MappedUniform(MappingSpec::logarithmic(3.0).unwrap()), 40, 1, 2).unwrap();
        let target = |z: &[f64]| 0.5 * crate::basis::eval_hermite_func(2, z[0]) - crate::basis::eval_hermite_func(3, z[0]);
        let b: Vec<f64> = s.rows().map(target).collect();
        let f = fit(&spec, &s, &b, Solver::Qr).unwrap();
        let e1 = linf_error(&f, &target, DEFAULT_EVAL_POINTS, 99).unwrap();
        assert!(e1 <= 1e-9);
        let g = |z: &[f64]| (-z[0] * z[0]).exp();
        let f = fit(&spec, &s, &s.rows().map(g).collect::<Vec<_>>(), Solver::Qr).unwrap();
        assert_eq!(linf_error(&f, &g, 500, 7).unwrap(), linf_error(&f, &g, 500, 7).unwrap());
    }

    #[test]
    fn expected_gram_flattens_for_huge_l() {
        let a = expected_gram(4, 1e4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((a[(i, j)] - e).abs() < 1e-3);
            }
        }
        assert!(expected_gram(65, 1.0).is_err());
    }

    #[test]
    fn expected_gram_spectrum_bounds() {
        for (k, l) in [(3, 2.0), (5, 4.0), (10, 16.0), (20, 8.0)] {
            let e = sym_eigs(&expected_gram(k, l).unwrap()).unwrap();
            assert!(e.lambda_max() <= 1.0 + 1e-8, "K={k} L={l}: {}", e.lambda_max());
            assert!(e.lambda_min() > 0.0);
        }
        let tau = crate::basis::estimate_tau(10).unwrap().tau;
        let l = (3.0 * tau).max(5.0 * 10f64.sqrt());
        let e = sym_eigs(&expected_gram(10, l).unwrap()).unwrap();
        assert!(e.lambda_min() >= 0.75 - 1e-8, "{}", e.lambda_min());
    }

    #[test]
    fn expected_gram_matches_monte_carlo() {
        // (2L/m) D^T D averages to abar.
        let (k, l) = (4, 3.0);
        let spec = spec_1d(BasisFamily::HermiteFunc, k as u32 - 1);
        let s = sample(Distribution::MappedUniform(MappingSpec::logarithmic(l).unwrap()), 400_000, 1, 3).unwrap();
        let mut g = gram(&assemble_design(&spec, &s).unwrap());
        g.scale(2.0 * l / s.len() as f64);
        let a = expected_gram(k, l).unwrap();
        for i in 0..k {
            for j in 0..k {
                assert!((g[(i, j)] - a[(i, j)]).abs() < 1e-2, "{i},{j}: {} vs {}", g[(i, j)], a[(i, j)]);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn scaled_fit_equals_unscaled_fit_of_composed_target(
                alpha in 0.3f64..4.0, seed in any::<u64>(), q in 1u32..8
            ) {
                let set = build_index_set(SpaceKind::TotalDegree, q, 1).unwrap();
                let m = 4 * set.len();
                let y = sample(Distribution::MappedUniform(MappingSpec::logarithmic(3.0).unwrap()), m, 1, seed).unwrap();
                let f = |z: f64| (-(z - 0.3).powi(2)).exp() * (1.0 + z);
                let scaled = BasisSpec::new(BasisFamily::HermiteFunc, set.clone(), vec![alpha]).unwrap();
                let b: Vec<f64> = y.rows().map(|p| f(p[0])).collect();
                let c1 = fit(&scaled, &y, &b, Solver::Qr).unwrap().coefficients;
                let ay = SampleSet::from_points(y.as_slice().iter().map(|v| alpha * v).collect(), 1, *y.distribution(), seed).unwrap();
                let b2: Vec<f64> = ay.rows().map(|p| f(p[0] / alpha)).collect();
                let c2 = fit(&BasisSpec::unscaled(BasisFamily::HermiteFunc, set), &ay, &b2, Solver::Qr).unwrap().coefficients;
                let scale = stable_norm(&c1).max(1.0);
                for (a, b) in c1.iter().zip(&c2) {
                    prop_assert!((a - b).abs() <= 1e-10 * scale, "{} vs {}", a, b);
                }
            }

            #[test]
            fn refitting_a_fit_is_idempotent(seed in any::<u64>(), q in 1u32..6) {
                let set = build_index_set(SpaceKind::TotalDegree, q, 2).unwrap();
                let spec = BasisSpec::unscaled(BasisFamily::HermiteFunc, set);
                let s = sample(Distribution::MappedUniform(MappingSpec::logarithmic(4.0).unwrap()), 3 * spec.len(), 2, seed).unwrap();
                let b: Vec<f64> = s.rows().map(|p| (p[0] - p[1]).cos() / (1.0 + p[0] * p[0])).collect();
                let f1 = fit(&spec, &s, &b, Solver::Qr).unwrap();
                let again = f1.eval_many(&s).unwrap();
                let f2 = fit(&spec, &s, &again, Solver::Qr).unwrap();
                let scale = stable_norm(&f1.coefficients).max(1.0);
                for (a, b) in f1.coefficients.iter().zip(&f2.coefficients) {
                    prop_assert!((a - b).abs() <= 1e-10 * scale);
                }
            }

            #[test]
            fn quantile_one_is_maximum(seed in any::<u64>(), m in 1usize..200, d in 1usize..4) {
                let s = sample(Distribution::Gaussian, m, d, seed).unwrap();
                let a = select_scaling(&s, &ScalingRule::quantile(3.0, 1.0).unwrap()).unwrap();
                let b = select_scaling(&s, &ScalingRule::maximum(3.0).unwrap()).unwrap();
                prop_assert_eq!(a, b);
            }

            #[test]
            fn solvers_agree_when_well_conditioned(seed in any::<u64>(), q in 1u32..10) {
                let spec = spec_1d(BasisFamily::HermiteFunc, q);
                let s = sample(Distribution::MappedUniform(MappingSpec::logarithmic(8.0).unwrap()), 6 * spec.len(), 1, seed).unwrap();
                let b: Vec<f64> = s.rows().map(|p| 2f64.powf(-0.6 * p[0] * p[0])).collect();
                if let Some(rel) = solver_agreement(&spec, &s, &b, 1e6).unwrap() {
                    prop_assert!(rel <= 1e-7, "rel diff {}", rel);
                }
            }
        }
    }
}
