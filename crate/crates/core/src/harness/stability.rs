//! Empirical check of the sampling-stability bound for Hermite functions on
//! logarithmically mapped uniform points.

use rayon::prelude::*;

use super::csv::{Cell, CsvTable};
use crate::basis::{estimate_tau, BasisFamily, BasisSpec};
use crate::error::{Error, Result};
use crate::linalg::{gram, sym_eigs};
use crate::lsq::{assemble_design, expected_gram};
use crate::multiindex::{build_index_set, SpaceKind};
use crate::sampling::{derive_trial_seed, sample, Distribution, MappingSpec};

/// Deviation `|||A^ - I|||` counted as a violation.
pub const STABILITY_THRESHOLD: f64 = 5.0 / 8.0;

/// `c_{1/2} = (1 + ln(1/2)) / 2`.
pub fn c_half() -> f64 {
    0.5 + 0.5 * 0.5f64.ln()
}

/// `kappa = 4 c_{1/2} / (3 (1 + r))`.
pub fn kappa(r: f64) -> f64 {
    4.0 * c_half() / (3.0 * (1.0 + r))
}

/// Smallest integer `m >= 3` with `m / ln m >= K / kappa`, by doubling then
/// bisection (the ratio is increasing for `m >= 3`).
pub fn m_min(k: usize, r: f64) -> Result<usize> {
    if k == 0 || !(r > 0.0 && r.is_finite()) {
        return Err(Error::Parameter(format!("need K >= 1 and r > 0, got K={k}, r={r}")));
    }
    let target = k as f64 / kappa(r);
    let ok = |m: usize| m as f64 / (m as f64).ln() >= target;
    if ok(3) {
        return Ok(3);
    }
    let mut lo = 3usize;
    let mut hi = 6usize;
    while !ok(hi) {
        lo = hi;
        hi = hi.checked_mul(2).ok_or_else(|| Error::Capacity("m_min search overflow".into()))?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCheckReport {
    pub k: usize,
    pub r: f64,
    pub kappa: f64,
    pub c_half: f64,
    pub m_min: usize,
    pub tau: f64,
    pub l_used: f64,
    pub trials: usize,
    /// Trials with `|||A^ - I||| >= 5/8`.
    pub violation_count: usize,
    /// `2 m_min^{-r}`.
    pub bound: f64,
    pub mean_dist: f64,
    pub max_dist: f64,
    /// Extreme eigenvalues of the expected matrix at `l_used`.
    pub expected_lambda_min: f64,
    pub expected_lambda_max: f64,
}

impl StabilityCheckReport {
    pub fn violation_fraction(&self) -> f64 {
        self.violation_count as f64 / self.trials as f64
    }

    pub fn within_bound(&self) -> bool {
        self.violation_fraction() <= self.bound
    }

    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(stability_columns());
        t.push_row(vec![
            self.k.into(),
            self.r.into(),
            self.kappa.into(),
            self.c_half.into(),
            self.m_min.into(),
            self.tau.into(),
            self.l_used.into(),
            self.trials.into(),
            self.violation_count.into(),
            self.violation_fraction().into(),
            self.bound.into(),
            self.mean_dist.into(),
            self.max_dist.into(),
            self.expected_lambda_min.into(),
            self.expected_lambda_max.into(),
        ]);
        t
    }

    pub fn summary(&self) -> String {
        let rows: Vec<String> = self
            .to_table()
            .columns
            .iter()
            .zip(&self.to_table().rows[0])
            .map(|(k, v): (&String, &Cell)| format!("{k:>20} = {}", v.render()))
            .collect();
        rows.join("\n")
    }
}

pub fn stability_columns() -> Vec<String> {
    [
        "K",
        "r",
        "kappa",
        "c_half",
        "m_min",
        "tau",
        "L_used",
        "trials",
        "violation_count",
        "violation_fraction",
        "bound",
        "mean_dist",
        "max_dist",
        "expected_lambda_min",
        "expected_lambda_max",
    ]
    .map(String::from)
    .to_vec()
}

/// Draws `m_min` points per trial with `L = 1.01 max(3 tau, 5 sqrt K)` and
/// records how often `A^ = (2L/m) D^T D` is at least 5/8 from the identity.
///
/// The factor `2L/m` makes `E[A^]` equal to the matrix with entries
/// `int (1 - tanh^2(y/L)) H~_i H~_j dy` (the uniform variable on `(-1, 1)`
/// has density 1/2).
pub fn run_stability_check(k: usize, r: f64, trials: usize, seed: u64) -> Result<StabilityCheckReport> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be >= 1".into()));
    }
    let m = m_min(k, r)?;
    let tau = estimate_tau(k)?.tau;
    let l_used = 1.01 * (3.0 * tau).max(5.0 * (k as f64).sqrt());
    let spec = BasisSpec::unscaled(BasisFamily::HermiteFunc, build_index_set(SpaceKind::TotalDegree, k as u32 - 1, 1)?);
    let dist = Distribution::MappedUniform(MappingSpec::logarithmic(l_used)?);
    let scale = 2.0 * l_used / m as f64;
    let dists: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let s = sample(dist, m, 1, derive_trial_seed(seed, trial))?;
            let mut a = gram(&assemble_design(&spec, &s)?);
            a.scale(scale);
            Ok(sym_eigs(&a)?.dist_to_identity)
        })
        .collect::<Result<_>>()?;
    let expected = sym_eigs(&expected_gram(k, l_used)?)?;
    Ok(StabilityCheckReport {
        k,
        r,
        kappa: kappa(r),
        c_half: c_half(),
        m_min: m,
        tau,
        l_used,
        trials,
        violation_count: dists.iter().filter(|&&d| d >= STABILITY_THRESHOLD).count(),
        bound: 2.0 * (m as f64).powf(-r),
        mean_dist: dists.iter().sum::<f64>() / trials as f64,
        max_dist: dists.iter().copied().fold(0.0, f64::max),
        expected_lambda_min: expected.lambda_min(),
        expected_lambda_max: expected.lambda_max(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((c_half() - 0.153_426_409_720_027_3).abs() < 1e-15);
        assert!((kappa(1.0) - 0.102_284_273_146_684_9).abs() < 1e-15);
    }

    #[test]
    fn m_min_is_the_smallest_admissible() {
        for (k, r) in [(1, 1.0), (3, 1.0), (5, 1.0), (8, 1.0), (5, 2.0), (40, 0.5)] {
            let m = m_min(k, r).unwrap();
            let target = k as f64 / kappa(r);
            let f = |m: usize| m as f64 / (m as f64).ln();
            assert!(f(m) >= target);
            assert!(m == 3 || f(m - 1) < target);
            // Linear scan oracle.
            let scan = (3..).find(|&m| f(m) >= target).unwrap();
            assert_eq!(m, scan, "K={k} r={r}");
        }
        assert_eq!(m_min(5, 1.0).unwrap(), 275);
    }

    #[test]
    fn small_check_runs_deterministically() {
        let a = run_stability_check(3, 1.0, 20, 7).unwrap();
        let b = run_stability_check(3, 1.0, 20, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.m_min, 147);
        assert!(a.l_used > (3.0 * a.tau).max(5.0 * 3f64.sqrt()));
        assert!(a.expected_lambda_max <= 1.0 + 1e-8);
    }
}
