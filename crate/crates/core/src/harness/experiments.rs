use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::csv::{Cell, CsvTable};
use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::linalg::{gram, sym_eigs, COND_SENTINEL};
use crate::lsq::{apply_scaling, assemble_design, fit, linf_error, Fit};
use crate::multiindex::{build_index_set, SpaceKind};
use crate::sampling::{derive_trial_seed, sample};
use crate::uqmodels::{
    elliptic_qoi_lsq_with, ode_qoi_lsq_with, reference_qoi, reference_qoi_tensor_quad, EllipticCoefficient,
    EllipticModel, OdeModel, QoIResult,
};

pub fn condition_columns() -> Vec<String> {
    ["q", "N", "m", "mean_cond", "geo_mean_cond", "std_log10_cond", "reps", "overflow", "failures"]
        .map(String::from)
        .to_vec()
}

pub fn convergence_columns(d: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["q", "N", "m"].map(String::from).to_vec();
    cols.extend((1..=d).map(|i| format!("alpha_{i}")));
    cols.extend(["cond", "linf_error", "status"].map(String::from));
    cols
}

pub fn uq_columns(d: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["q", "N", "m", "approx_qoi", "reference_qoi", "abs_error", "cond"]
        .map(String::from)
        .to_vec();
    cols.extend((1..=d).map(|i| format!("alpha_{i}")));
    cols.extend(["rejected", "status"].map(String::from));
    cols
}

/// Seed of the sample set used at order `q`.
fn order_seed(base: u64, q: u32) -> u64 {
    derive_trial_seed(base, u64::from(q))
}

fn status_of(e: &Error) -> String {
    format!("error: {e}")
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<CsvTable> {
    match config.kind {
        ExperimentKind::Condnum => run_condition_experiment(config),
        ExperimentKind::Converge => run_convergence_experiment(config),
        ExperimentKind::UqOde | ExperimentKind::UqElliptic => run_uq_experiment(config),
    }
}

/// Condition numbers of `A = D^T D` over `reps` independent draws per order.
pub fn run_condition_experiment(config: &ExperimentConfig) -> Result<CsvTable> {
    config.validate()?;
    let dist = config.distribution()?;
    let mut table = CsvTable::new(condition_columns());
    for q in config.q_values() {
        let set = build_index_set(config.space, q, config.dim)?;
        let n = set.len();
        let m = config.plan.sample_count(n)?;
        let spec = BasisSpec::unscaled(config.family, set);
        let base = order_seed(config.seed, q);
        let conds: Vec<Result<f64>> = (0..config.reps as u64)
            .into_par_iter()
            .map(|trial| {
                let s = sample(dist, m, config.dim, derive_trial_seed(base, trial))?;
                let d = assemble_design(&spec, &s)?;
                Ok(sym_eigs(&gram(&d))?.cond)
            })
            .collect();
        let ok: Vec<f64> = conds.iter().filter_map(|c| c.as_ref().ok().copied()).collect();
        let failures = conds.len() - ok.len();
        let finite: Vec<f64> = ok.iter().copied().filter(|&c| c < COND_SENTINEL).collect();
        let overflow = ok.len() - finite.len();
        let mean = if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().sum::<f64>() / ok.len() as f64
        };
        let logs: Vec<f64> = finite.iter().map(|c| c.log10()).collect();
        let (geo, std) = if logs.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let mu = logs.iter().sum::<f64>() / logs.len() as f64;
            let var = logs.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / logs.len() as f64;
            (10f64.powf(mu), var.sqrt())
        };
        table.push_row(vec![
            q.into(),
            n.into(),
            m.into(),
            mean.into(),
            geo.into(),
            std.into(),
            config.reps.into(),
            overflow.into(),
            failures.into(),
        ]);
    }
    Ok(table)
}

/// The fit made at order `q` by a convergence run, and its sup error.
pub fn convergence_fit(config: &ExperimentConfig, q: u32) -> Result<(Fit, f64)> {
    let target = config
        .target
        .as_ref()
        .ok_or_else(|| Error::Parameter("converge needs a target".into()))?;
    let set = build_index_set(config.space, q, config.dim)?;
    let m = config.plan.sample_count(set.len())?;
    let drawn = sample(config.distribution()?, m, config.dim, order_seed(config.seed, q))?;
    let (spec, points) = apply_scaling(config.family, set, &drawn, &config.scaling)?;
    let values: Vec<f64> = points.rows().map(|y| target.eval(y)).collect();
    let fitted = fit(&spec, &points, &values, config.solver)?;
    let err = linf_error(&fitted, &|y| target.eval(y), config.n_eval, config.eval_seed())?;
    Ok((fitted, err))
}

pub fn run_convergence_experiment(config: &ExperimentConfig) -> Result<CsvTable> {
    config.validate()?;
    let d = config.dim;
    let qs: Vec<u32> = config.q_values().collect();
    let rows: Vec<Result<Vec<Cell>>> = qs
        .par_iter()
        .map(|&q| {
            let set = build_index_set(config.space, q, d)?;
            let n = set.len();
            let m = config.plan.sample_count(n)?;
            let mut row: Vec<Cell> = vec![q.into(), n.into(), m.into()];
            match convergence_fit(config, q) {
                Ok((f, err)) => {
                    row.extend(f.spec.alpha().iter().map(|&a| Cell::from(a)));
                    row.extend([f.cond().into(), err.into(), "ok".into()]);
                }
                Err(e) => {
                    row.extend((0..d).map(|_| Cell::from(f64::NAN)));
                    row.extend([f64::NAN.into(), f64::NAN.into(), status_of(&e).into()]);
                }
            }
            Ok(row)
        })
        .collect();
    let mut table = CsvTable::new(convergence_columns(d));
    for r in rows {
        table.push_row(r?);
    }
    Ok(table)
}

fn elliptic_model(config: &ExperimentConfig) -> Result<EllipticModel> {
    EllipticModel::new(config.coefficient, config.n_elems, config.x0)
}

/// Dimension of the parameter space of a UQ experiment.
fn uq_dim(config: &ExperimentConfig) -> usize {
    match config.kind {
        ExperimentKind::UqElliptic => config.coefficient.dim(),
        _ => 1,
    }
}

/// One QoI estimate at order `q`, sharing a precomputed reference.
pub fn uq_point(config: &ExperimentConfig, q: u32, reference: Option<f64>) -> Result<QoIResult> {
    let seed = order_seed(config.seed, q);
    match config.kind {
        ExperimentKind::UqOde => {
            let model = OdeModel::new(config.beta, config.t)?;
            ode_qoi_lsq_with(&model, q, &config.plan, config.l, &config.scaling, seed, config.ode_mode, config.solver)
        }
        ExperimentKind::UqElliptic => {
            let model = elliptic_model(config)?;
            elliptic_qoi_lsq_with(&model, q, &config.plan, config.l, seed, config.solver, reference)
        }
        _ => Err(Error::Parameter(format!("{} is not a UQ experiment", config.kind.as_str()))),
    }
}

pub fn run_uq_experiment(config: &ExperimentConfig) -> Result<CsvTable> {
    config.validate()?;
    let d = uq_dim(config);
    let reference = match config.kind {
        ExperimentKind::UqElliptic => {
            let model = elliptic_model(config)?;
            Some(match model.coefficient {
                EllipticCoefficient::SingleParam(_) => reference_qoi(&model),
                _ => reference_qoi_tensor_quad(&model, config.ref_nodes),
            })
        }
        _ => None,
    };
    let mut table = CsvTable::new(uq_columns(d));
    for q in config.q_values() {
        // Both UQ pipelines use total-degree sets.
        let set = build_index_set(SpaceKind::TotalDegree, q, d)?;
        let n = set.len();
        let m = config.plan.sample_count(n)?;
        let result = match &reference {
            Some(Err(e)) => Err(e.clone()),
            Some(Ok(r)) => uq_point(config, q, Some(*r)),
            None => uq_point(config, q, None),
        };
        let mut row: Vec<Cell> = vec![q.into(), n.into(), m.into()];
        match result {
            Ok(r) => {
                row.extend([r.approx.into(), r.reference.into(), r.abs_error.into(), r.cond().into()]);
                row.extend(r.alpha.iter().map(|&a| Cell::from(a)));
                row.extend([r.rejected.into(), "ok".into()]);
            }
            Err(e) => {
                row.extend((0..4 + d).map(|_| Cell::from(f64::NAN)));
                let label = match e {
                    Error::DivergentQoi(_) => format!("divergent-qoi: {e}"),
                    _ => status_of(&e),
                };
                row.extend([0usize.into(), label.into()]);
            }
        }
        table.push_row(row);
    }
    Ok(table)
}
