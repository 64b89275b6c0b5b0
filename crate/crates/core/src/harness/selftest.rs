//! Fast internal consistency checks behind the `selftest` subcommand.

use super::config::{ExperimentConfig, ExperimentKind};
use super::csv::CsvTable;
use super::experiments::{condition_columns, convergence_columns, run_experiment, uq_columns};
use super::stability::{run_stability_check, stability_columns};
use super::targets::TargetFunction;
use crate::basis::BasisFamily;
use crate::linalg::{golub_welsch, GaussWeight};
use crate::sampling::{sample, Distribution};
use crate::uqmodels::{ode_qoi_reference, EllipticCoefficient};

#[derive(Debug, Clone)]
pub struct SelfTestCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, result: std::result::Result<String, String>) -> SelfTestCheck {
    let (passed, detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    SelfTestCheck {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn orthonormality(weight: GaussWeight, family: BasisFamily) -> std::result::Result<String, String> {
    let rule = golub_welsch(64, weight).map_err(|e| e.to_string())?;
    let vals: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .map(|&x| {
            let mut b = vec![0.0; 21];
            family.eval_upto(x, &mut b).map(|_| b)
        })
        .collect::<crate::Result<_>>()
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for i in 0..=20 {
        for j in 0..=20 {
            let g: f64 = rule.weights.iter().zip(&vals).map(|(w, v)| w * v[i] * v[j]).sum();
            worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    if worst <= 1e-10 {
        Ok(format!("max deviation {worst:.3e}"))
    } else {
        Err(format!("max deviation {worst:.3e} > 1e-10"))
    }
}

/// Verifies header, row widths, and that every numeric cell re-parses.
fn schema(table: &CsvTable, expected: &[String]) -> std::result::Result<String, String> {
    if table.columns != expected {
        return Err(format!("columns {:?} != {:?}", table.columns, expected));
    }
    let text = table.to_csv_string();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(format!("header row {header:?} does not match"));
    }
    let mut count = 0;
    for (record, row) in reader.records().zip(&table.rows) {
        let record = record.map_err(|e| e.to_string())?;
        if record.len() != expected.len() {
            return Err(format!("row width {} != {}", record.len(), expected.len()));
        }
        for (text, cell) in record.iter().zip(row) {
            if let Some(v) = cell.as_f64() {
                let back: f64 = text.parse().map_err(|_| format!("unparsable number '{text}'"))?;
                if !(back == v || (back.is_nan() && v.is_nan())) {
                    return Err(format!("{text} does not round-trip"));
                }
            }
        }
        count += 1;
    }
    if count != table.rows.len() {
        return Err(format!("read back {count} of {} rows", table.rows.len()));
    }
    Ok(format!("{} columns, {} rows", expected.len(), table.rows.len()))
}

fn run_schema(config: ExperimentConfig, expected: Vec<String>) -> std::result::Result<String, String> {
    let table = run_experiment(&config).map_err(|e| e.to_string())?;
    schema(&table, &expected)
}

pub fn run_selftest() -> Vec<SelfTestCheck> {
    let mut out = vec![
        check("orthonormality/hermite-poly", orthonormality(GaussWeight::Hermite, BasisFamily::HermitePoly)),
        check(
            "orthonormality/laguerre-poly",
            orthonormality(GaussWeight::Laguerre, BasisFamily::LaguerrePoly),
        ),
    ];

    out.push(check("sampling/determinism", {
        let a = sample(Distribution::Gaussian, 64, 2, 11);
        let b = sample(Distribution::Gaussian, 64, 2, 11);
        match (a, b) {
            (Ok(a), Ok(b)) if a == b => Ok("identical streams".into()),
            _ => Err("same seed produced different samples".into()),
        }
    }));

    out.push(check("ode/reference", {
        let gl = golub_welsch(64, GaussWeight::Laguerre).map_err(|e| e.to_string());
        gl.and_then(|gl| {
            let quad = gl.integrate(|y| (-3.0 * y).exp());
            let exact = ode_qoi_reference(1.0, 1.5).map_err(|e| e.to_string())?;
            if (quad - exact).abs() < 1e-12 {
                Ok(format!("{exact} (quadrature {quad})"))
            } else {
                Err(format!("quadrature {quad} vs {exact}"))
            }
        })
    }));

    let mut cond = ExperimentConfig::new(ExperimentKind::Condnum);
    cond.q_max = 3;
    cond.reps = 3;
    out.push(check("schema/condnum", run_schema(cond, condition_columns())));

    let mut conv = ExperimentConfig::new(ExperimentKind::Converge);
    conv.q_max = 3;
    conv.dim = 2;
    conv.target = Some(TargetFunction::gauss_sin_2d());
    conv.n_eval = 50;
    out.push(check("schema/converge", run_schema(conv, convergence_columns(2))));

    let mut ode = ExperimentConfig::new(ExperimentKind::UqOde);
    ode.q_max = 3;
    out.push(check("schema/uq-ode", run_schema(ode, uq_columns(1))));

    let mut ell = ExperimentConfig::new(ExperimentKind::UqElliptic);
    ell.coefficient = EllipticCoefficient::SingleParam(0.5);
    ell.q_max = 2;
    ell.n_elems = 32;
    out.push(check("schema/uq-elliptic", run_schema(ell, uq_columns(1))));

    out.push(check(
        "schema/stability",
        run_stability_check(2, 1.0, 5, 1)
            .map_err(|e| e.to_string())
            .and_then(|r| schema(&r.to_table(), &stability_columns())),
    ));
    out
}
