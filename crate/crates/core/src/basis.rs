//! Hermite and Laguerre polynomials and functions, and their tensor products.
//!
//! Hermite polynomials are orthonormal under `e^{-y^2}` on the real line;
//! Laguerre polynomials under `e^{-y}` on the half line. The function variants
//! absorb the square root of the weight, `H~_k(y) = e^{-y^2/2} H_k(y)` and
//! `L~_k(y) = e^{-y/2} L_k(y)`, and are orthonormal under Lebesgue measure.
//! They are evaluated by running the three-term recurrence directly on the
//! premultiplied values, so large arguments underflow to zero instead of
//! producing `inf * 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::multiindex::IndexSet;

/// `pi^{-1/4}`, the value of the normalized `H_0`.
pub const PI_POW_NEG_QUARTER: f64 = 0.751_125_544_464_942_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisFamily {
    HermitePoly,
    HermiteFunc,
    LaguerrePoly,
    LaguerreFunc,
}

impl BasisFamily {
    pub fn is_laguerre(self) -> bool {
        matches!(self, BasisFamily::LaguerrePoly | BasisFamily::LaguerreFunc)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BasisFamily::HermitePoly => "hermite-poly",
            BasisFamily::HermiteFunc => "hermite-func",
            BasisFamily::LaguerrePoly => "laguerre-poly",
            BasisFamily::LaguerreFunc => "laguerre-func",
        }
    }

    /// Fills `out[k]` with `phi_k(y)` for `k = 0..out.len()`.
    pub fn eval_upto(self, y: f64, out: &mut [f64]) -> Result<()> {
        match self {
            BasisFamily::HermitePoly => hermite_recurrence(y, PI_POW_NEG_QUARTER, out),
            BasisFamily::HermiteFunc => {
                hermite_recurrence(y, PI_POW_NEG_QUARTER * (-0.5 * y * y).exp(), out)
            }
            BasisFamily::LaguerrePoly => {
                check_half_line(y)?;
                laguerre_recurrence(y, 1.0, out)
            }
            BasisFamily::LaguerreFunc => {
                check_half_line(y)?;
                laguerre_recurrence(y, (-0.5 * y).exp(), out)
            }
        }
        Ok(())
    }

    pub fn eval(self, k: usize, y: f64) -> Result<f64> {
        let mut buf = vec![0.0; k + 1];
        self.eval_upto(y, &mut buf)?;
        Ok(buf[k])
    }
}

impl std::str::FromStr for BasisFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hermite-poly" => Ok(BasisFamily::HermitePoly),
            "hermite-func" => Ok(BasisFamily::HermiteFunc),
            "laguerre-poly" => Ok(BasisFamily::LaguerrePoly),
            "laguerre-func" => Ok(BasisFamily::LaguerreFunc),
            other => Err(Error::Parameter(format!("unknown basis family '{other}'"))),
        }
    }
}

fn check_half_line(y: f64) -> Result<()> {
    if y < 0.0 || y.is_nan() {
        return Err(Error::Domain {
            coord: 0,
            value: y,
            reason: "Laguerre basis requires y >= 0",
        });
    }
    Ok(())
}

// H_{k+1} = y sqrt(2/(k+1)) H_k - sqrt(k/(k+1)) H_{k-1}
fn hermite_recurrence(y: f64, h0: f64, out: &mut [f64]) {
    let Some(first) = out.first_mut() else { return };
    *first = h0;
    if out.len() == 1 {
        return;
    }
    out[1] = std::f64::consts::SQRT_2 * y * h0;
    for k in 1..out.len() - 1 {
        let kf = k as f64;
        out[k + 1] = y * (2.0 / (kf + 1.0)).sqrt() * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

// (k+1) L_{k+1} = (2k+1-y) L_k - k L_{k-1}
fn laguerre_recurrence(y: f64, l0: f64, out: &mut [f64]) {
    let Some(first) = out.first_mut() else { return };
    *first = l0;
    if out.len() == 1 {
        return;
    }
    out[1] = (1.0 - y) * l0;
    for k in 1..out.len() - 1 {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0 - y) * out[k] - kf * out[k - 1]) / (kf + 1.0);
    }
}

/// Orthonormal Hermite polynomial (weight `e^{-y^2}`).
pub fn eval_hermite_poly(k: usize, y: f64) -> f64 {
    let mut buf = vec![0.0; k + 1];
    hermite_recurrence(y, PI_POW_NEG_QUARTER, &mut buf);
    buf[k]
}

/// Hermite function `e^{-y^2/2} H_k(y)`.
pub fn eval_hermite_func(k: usize, y: f64) -> f64 {
    let mut buf = vec![0.0; k + 1];
    hermite_recurrence(y, PI_POW_NEG_QUARTER * (-0.5 * y * y).exp(), &mut buf);
    buf[k]
}

/// Laguerre polynomial (orthonormal under `e^{-y}` on `[0, inf)`).
pub fn eval_laguerre_poly(k: usize, y: f64) -> Result<f64> {
    BasisFamily::LaguerrePoly.eval(k, y)
}

/// Laguerre function `e^{-y/2} L_k(y)`.
pub fn eval_laguerre_func(k: usize, y: f64) -> Result<f64> {
    BasisFamily::LaguerreFunc.eval(k, y)
}

/// A tensorized basis over an index set, with per-dimension argument scaling
/// `Phi_n(alpha * y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    family: BasisFamily,
    index_set: IndexSet,
    alpha: Vec<f64>,
}

impl BasisSpec {
    pub fn new(family: BasisFamily, index_set: IndexSet, alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() != index_set.dim() {
            return Err(Error::DimensionMismatch {
                expected: index_set.dim(),
                got: alpha.len(),
            });
        }
        if let Some(bad) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Parameter(format!("scaling factors must be positive, got {bad}")));
        }
        Ok(Self {
            family,
            index_set,
            alpha,
        })
    }

    pub fn unscaled(family: BasisFamily, index_set: IndexSet) -> Self {
        let d = index_set.dim();
        Self {
            family,
            index_set,
            alpha: vec![1.0; d],
        }
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.index_set.dim()
    }

    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }

    pub fn row_evaluator(&self) -> RowEvaluator<'_> {
        let width = self.index_set.max_order() as usize + 1;
        RowEvaluator {
            spec: self,
            width,
            table: vec![0.0; width * self.dim()],
        }
    }
}

/// Reusable scratch space for evaluating many rows of the same basis.
pub struct RowEvaluator<'a> {
    spec: &'a BasisSpec,
    width: usize,
    table: Vec<f64>,
}

impl RowEvaluator<'_> {
    pub fn eval_into(&mut self, point: &[f64], out: &mut [f64]) -> Result<()> {
        let spec = self.spec;
        if point.len() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                got: point.len(),
            });
        }
        debug_assert_eq!(out.len(), spec.len());
        for (i, (&y, &a)) in point.iter().zip(&spec.alpha).enumerate() {
            let slot = &mut self.table[i * self.width..(i + 1) * self.width];
            spec.family.eval_upto(a * y, slot).map_err(|e| match e {
                Error::Domain { value, reason, .. } => Error::Domain {
                    coord: i,
                    value,
                    reason,
                },
                other => other,
            })?;
        }
        for (o, n) in out.iter_mut().zip(spec.index_set.iter()) {
            *o = n
                .entries()
                .iter()
                .enumerate()
                .map(|(i, &k)| self.table[i * self.width + k as usize])
                .product();
        }
        Ok(())
    }
}

/// Row `(Phi_n(alpha * y))_{n in Lambda}` in canonical index order.
pub fn eval_basis_row(spec: &BasisSpec, point: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; spec.len()];
    spec.row_evaluator().eval_into(point, &mut out)?;
    Ok(out)
}

/// A radius beyond which the first `k` Hermite functions are all bounded
/// by `|y|^{-3/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailConstant {
    pub k: usize,
    pub tau: f64,
}

const TAU_STEP: f64 = 0.01;

/// Scans a uniform grid for the last point where `max_k |H~_k(y)| > y^{-3/2}`
/// and returns the grid value at (or just above) it. The answer is then
/// re-checked on a grid ten times finer.
pub fn estimate_tau(k: usize) -> Result<TailConstant> {
    if k == 0 {
        return Err(Error::Parameter("estimate_tau needs K >= 1".into()));
    }
    // Past the largest root (~sqrt(2K)) the functions decay like a Gaussian;
    // 40 more units is far beyond any crossing with y^{-3/2}.
    let y_max = (2.0 * k as f64 + 1.0).sqrt() + 40.0;
    let mut buf = vec![0.0; k];
    let mut violates = |y: f64| {
        hermite_recurrence(y, PI_POW_NEG_QUARTER * (-0.5 * y * y).exp(), &mut buf);
        let peak = buf.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        peak > y.powf(-1.5)
    };

    let steps = (y_max / TAU_STEP).ceil() as usize;
    let mut last_bad = 0usize;
    for i in 1..=steps {
        if violates(i as f64 * TAU_STEP) {
            last_bad = i;
        }
    }
    let mut tau_steps = last_bad;

    for _ in 0..100 {
        let start = tau_steps * 10;
        let fine_bad = (start + 1..=steps * 10)
            .filter(|&j| violates(j as f64 * TAU_STEP / 10.0))
            .last();
        match fine_bad {
            None => {
                return Ok(TailConstant {
                    k,
                    tau: tau_steps as f64 * TAU_STEP,
                })
            }
            Some(j) => tau_steps = j.div_ceil(10),
        }
    }
    Err(Error::Internal(format!("tail audit for K = {k} did not settle")))
}

/// `integral_R H~_k(y) dy`, the moment used by Hermite-function QoIs. Zero
/// for odd `k`.
pub fn hermite_func_integral(k: usize) -> f64 {
    hermite_func_integrals(k + 1)[k]
}

/// `integral_R H~_j` for `j < n`, by the closed-form recurrence
/// `J_{k+2} = sqrt((k+1)/(k+2)) J_k`, `J_0 = sqrt(2) pi^{1/4}`.
pub fn hermite_func_integrals(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if n > 0 {
        out[0] = std::f64::consts::SQRT_2 * PI.powf(0.25);
    }
    for k in (2..n).step_by(2) {
        let kf = (k - 2) as f64;
        out[k] = ((kf + 1.0) / (kf + 2.0)).sqrt() * out[k - 2];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::{build_index_set, SpaceKind};
    use approx::assert_relative_eq;

    // Composite Simpson rule, independent of the crate's quadrature code.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn hermite_poly_values() {
        assert_relative_eq!(eval_hermite_poly(0, 3.7), PI.powf(-0.25), max_relative = 1e-15);
        assert_relative_eq!(PI_POW_NEG_QUARTER, PI.powf(-0.25), max_relative = 1e-15);
        assert_eq!(eval_hermite_poly(1, 0.0), 0.0);
        assert_relative_eq!(eval_hermite_poly(2, 0.0), -0.531_125_966_0, epsilon = 1e-10);
        // H_2 = pi^{-1/4} (2y^2 - 1)/sqrt(2)
        let y = 1.3;
        assert_relative_eq!(
            eval_hermite_poly(2, y),
            PI.powf(-0.25) * (2.0 * y * y - 1.0) / 2f64.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn hermite_func_values() {
        assert_relative_eq!(eval_hermite_func(0, 0.0), 0.751_125_544_4, epsilon = 1e-10);
        assert_eq!(eval_hermite_func(3, 0.0), 0.0);
        assert_eq!(eval_hermite_func(25, 200.0), 0.0);
    }

    #[test]
    fn laguerre_values() {
        assert_eq!(eval_laguerre_poly(0, 7.3).unwrap(), 1.0);
        assert_eq!(eval_laguerre_poly(1, 1.0).unwrap(), 0.0);
        for k in 0..10 {
            assert_relative_eq!(eval_laguerre_poly(k, 0.0).unwrap(), 1.0, max_relative = 1e-14);
        }
        assert_eq!(eval_laguerre_func(0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(eval_laguerre_func(1, 2.0).unwrap(), -(-1f64).exp(), max_relative = 1e-14);
        assert!(eval_laguerre_func(5, 800.0).unwrap().abs() < 1e-150);
        assert!(matches!(eval_laguerre_poly(2, -0.1), Err(Error::Domain { .. })));
        assert!(matches!(eval_laguerre_func(2, -1e-300), Err(Error::Domain { .. })));
    }

    #[test]
    fn function_variants_are_weighted_polynomials() {
        for k in 0..30 {
            for &y in &[-6.0, -2.5, -0.3, 0.0, 0.7, 3.1, 8.0] {
                let p = eval_hermite_poly(k, y);
                let f = eval_hermite_func(k, y);
                let expect = (-0.5 * y * y).exp() * p;
                if expect.abs() > 1e-280 {
                    assert_relative_eq!(f, expect, max_relative = 1e-12);
                }
            }
            for &y in &[0.0, 0.4, 2.0, 11.0, 60.0] {
                let p = eval_laguerre_poly(k, y).unwrap();
                let f = eval_laguerre_func(k, y).unwrap();
                let expect = (-0.5 * y).exp() * p;
                if expect.abs() > 1e-280 {
                    assert_relative_eq!(f, expect, max_relative = 1e-12, epsilon = 1e-300);
                }
            }
        }
    }

    // Richardson-extrapolated composite Simpson on a precomputed table of
    // all n+1 function values per grid point.
    fn gram_by_simpson(fam: BasisFamily, n: usize, a: f64, b: f64, intervals: usize) -> Vec<Vec<f64>> {
        let table = |cells: usize| -> Vec<Vec<f64>> {
            let h = (b - a) / cells as f64;
            (0..=cells)
                .map(|i| {
                    let mut buf = vec![0.0; n + 1];
                    fam.eval_upto(a + i as f64 * h, &mut buf).unwrap();
                    buf
                })
                .collect()
        };
        let simpson_gram = |cells: usize| -> Vec<Vec<f64>> {
            let t = table(cells);
            let h = (b - a) / cells as f64;
            let mut g = vec![vec![0.0; n + 1]; n + 1];
            for (k, row) in t.iter().enumerate() {
                let w = if k == 0 || k == cells { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                for i in 0..=n {
                    for j in 0..=n {
                        g[i][j] += w * row[i] * row[j];
                    }
                }
            }
            g.iter_mut().flatten().for_each(|v| *v *= h / 3.0);
            g
        };
        let coarse = simpson_gram(intervals);
        let fine = simpson_gram(2 * intervals);
        fine.iter()
            .zip(&coarse)
            .map(|(f, c)| f.iter().zip(c).map(|(f, c)| f + (f - c) / 15.0).collect())
            .collect()
    }

    #[test]
    fn function_orthonormality_by_composite_quadrature() {
        let n = 20;
        let h = gram_by_simpson(BasisFamily::HermiteFunc, n, -40.0, 40.0, 16_000);
        let l = gram_by_simpson(BasisFamily::LaguerreFunc, n, 0.0, 400.0, 80_000);
        for i in 0..=n {
            for j in 0..=n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((h[i][j] - expect).abs() < 1e-8, "H~ {i},{j}: {}", h[i][j]);
                assert!((l[i][j] - expect).abs() < 1e-8, "L~ {i},{j}: {}", l[i][j]);
            }
        }
    }

    #[test]
    fn uniform_bounds() {
        for k in 0..=40 {
            let mut max_h = 0.0f64;
            let mut max_l = 0.0f64;
            for i in 0..=40_000 {
                let y = -40.0 + i as f64 * 0.002;
                max_h = max_h.max(eval_hermite_func(k, y).powi(2));
                let x = i as f64 * 0.01;
                max_l = max_l.max(eval_laguerre_func(k, x).unwrap().powi(2));
            }
            assert!(max_h < 1.0, "k={k}: {max_h}");
            assert!(max_l <= 1.0 + 1e-15, "k={k}: {max_l}");
        }
    }

    #[test]
    fn row_at_origin() {
        let set = build_index_set(SpaceKind::TotalDegree, 1, 2).unwrap();
        let spec = BasisSpec::unscaled(BasisFamily::HermiteFunc, set);
        let row = eval_basis_row(&spec, &[0.0, 0.0]).unwrap();
        assert_relative_eq!(row[0], 1.0 / PI.sqrt(), max_relative = 1e-15);
        assert_eq!(&row[1..], &[0.0, 0.0]);
    }

    #[test]
    fn row_scaling_and_1d_consistency() {
        let set = build_index_set(SpaceKind::TotalDegree, 4, 1).unwrap();
        let scaled = BasisSpec::new(BasisFamily::HermiteFunc, set.clone(), vec![2.0]).unwrap();
        let plain = BasisSpec::unscaled(BasisFamily::HermiteFunc, set.clone());
        assert_eq!(
            eval_basis_row(&scaled, &[1.3]).unwrap(),
            eval_basis_row(&plain, &[2.6]).unwrap()
        );
        for fam in [
            BasisFamily::HermitePoly,
            BasisFamily::HermiteFunc,
            BasisFamily::LaguerrePoly,
            BasisFamily::LaguerreFunc,
        ] {
            let spec = BasisSpec::unscaled(fam, set.clone());
            let row = eval_basis_row(&spec, &[0.9]).unwrap();
            for (k, v) in row.iter().enumerate() {
                assert_eq!(*v, fam.eval(k, 0.9).unwrap());
            }
        }
    }

    #[test]
    fn row_domain_error_names_coordinate() {
        let set = build_index_set(SpaceKind::TotalDegree, 2, 3).unwrap();
        let spec = BasisSpec::unscaled(BasisFamily::LaguerreFunc, set);
        match eval_basis_row(&spec, &[1.0, 2.0, -0.5]) {
            Err(Error::Domain { coord, value, .. }) => {
                assert_eq!(coord, 2);
                assert_eq!(value, -0.5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_alpha_rejected() {
        let set = build_index_set(SpaceKind::TotalDegree, 2, 2).unwrap();
        assert!(BasisSpec::new(BasisFamily::HermiteFunc, set.clone(), vec![1.0, 0.0]).is_err());
        assert!(BasisSpec::new(BasisFamily::HermiteFunc, set, vec![1.0]).is_err());
    }

    #[test]
    fn tau_properties() {
        let t1 = estimate_tau(1).unwrap();
        assert!(t1.tau <= 2.0);
        let mut prev = 0.0;
        for k in 1..=12 {
            let t = estimate_tau(k).unwrap().tau;
            assert!(t >= prev, "K={k}: {t} < {prev}");
            prev = t;
            // Invariant re-check on an independent, offset grid.
            for i in 0..20_000 {
                let y = t + 0.0037 + i as f64 * 0.0031;
                let peak = (0..k).map(|j| eval_hermite_func(j, y).abs()).fold(0.0, f64::max);
                assert!(peak <= y.powf(-1.5), "K={k} y={y}");
            }
        }
    }

    #[test]
    fn tau_fixture_k10() {
        // Frozen from a brute-force scan; sits near the largest root of H_10,
        // about sqrt(2*10) = 4.47.
        let t = estimate_tau(10).unwrap().tau;
        assert_relative_eq!(t, TAU_K10, epsilon = 1e-9);
        assert!(t > 3.0 && t < 2.0 * (20f64).sqrt());
    }
    const TAU_K10: f64 = 4.99;

    #[test]
    fn hermite_func_integrals_match_quadrature() {
        let js = hermite_func_integrals(21);
        for (k, j) in js.iter().enumerate() {
            let q = simpson(|y| eval_hermite_func(k, y), -40.0, 40.0, 16_000);
            assert!((q - j).abs() < 1e-10, "k={k}: {q} vs {j}");
            if k % 2 == 1 {
                assert_eq!(*j, 0.0);
            }
        }
        assert_relative_eq!(js[0], PI.powf(-0.25) * (2.0 * PI).sqrt(), max_relative = 1e-15);
    }
}
