//! Named target functions for convergence studies.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::basis::eval_hermite_func;
use crate::error::{Error, Result};

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A target `f: R^d -> R` identified by name and parameters, written as
/// `name` or `name(key=value,...)`.
#[derive(Clone)]
pub struct TargetFunction {
    id: String,
    dim: Option<usize>,
    params: BTreeMap<String, f64>,
    eval: Evaluator,
}

impl fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TargetFunction({self})")
    }
}

impl fmt::Display for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id)?;
        if !self.params.is_empty() {
            let parts: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "({})", parts.join(";"))?;
        }
        Ok(())
    }
}

pub const REGISTERED_TARGETS: &[&str] = &["gauss_decay", "gauss_sin_2d", "ode_tilde", "hermite_func"];

impl TargetFunction {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, params) = match text.find('(') {
            Some(open) => {
                let close = text
                    .rfind(')')
                    .filter(|&c| c == text.len() - 1 && c > open)
                    .ok_or_else(|| Error::Parameter(format!("malformed target '{text}'")))?;
                (&text[..open], parse_params(&text[open + 1..close])?)
            }
            None => (text, BTreeMap::new()),
        };
        Self::build(name.trim(), params)
    }

    pub fn gauss_decay(p: f64) -> Self {
        Self::build("gauss_decay", BTreeMap::from([("p".to_string(), p)])).expect("valid parameters")
    }

    pub fn gauss_sin_2d() -> Self {
        Self::build("gauss_sin_2d", BTreeMap::new()).expect("valid parameters")
    }

    pub fn ode_tilde(beta: f64, t: f64) -> Self {
        Self::build("ode_tilde", BTreeMap::from([("beta".to_string(), beta), ("t".to_string(), t)]))
            .expect("valid parameters")
    }

    fn build(name: &str, params: BTreeMap<String, f64>) -> Result<Self> {
        let get = |key: &str, default: Option<f64>| -> Result<f64> {
            params
                .get(key)
                .copied()
                .or(default)
                .ok_or_else(|| Error::Parameter(format!("target '{name}' needs parameter '{key}'")))
        };
        let allowed: &[&str] = match name {
            "gauss_decay" => &["p"],
            "gauss_sin_2d" => &[],
            "ode_tilde" => &["beta", "t"],
            "hermite_func" => &["n"],
            _ => {
                return Err(Error::Parameter(format!(
                    "unknown target '{name}' (known: {})",
                    REGISTERED_TARGETS.join(", ")
                )))
            }
        };
        if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Parameter(format!("target '{name}' has no parameter '{bad}'")));
        }
        let (dim, eval): (Option<usize>, Evaluator) = match name {
            "gauss_decay" => {
                let p = get("p", None)?;
                (None, Arc::new(move |y: &[f64]| (-p * y.iter().map(|v| v * v).sum::<f64>()).exp2()))
            }
            "gauss_sin_2d" => (
                Some(2),
                Arc::new(|y: &[f64]| (-4.0 * (y[0] * y[0] + y[1] * y[1])).exp() * (y[0] + y[1]).sin()),
            ),
            "ode_tilde" => {
                let beta = get("beta", Some(1.5))?;
                let t = get("t", Some(1.0))?;
                (Some(1), Arc::new(move |y: &[f64]| (-(1.0 + 2.0 * beta * t) * y[0]).exp()))
            }
            "hermite_func" => {
                let n = get("n", None)?;
                if !(n >= 0.0 && n.fract() == 0.0 && n <= 1000.0) {
                    return Err(Error::Parameter(format!("hermite_func needs integer n in 0..=1000, got {n}")));
                }
                let n = n as usize;
                (Some(1), Arc::new(move |y: &[f64]| eval_hermite_func(n, y[0])))
            }
            _ => unreachable!(),
        };
        Ok(Self {
            id: name.to_string(),
            dim,
            params,
            eval,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// Fixed dimension, or `None` for targets defined in any dimension.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn supports_dim(&self, d: usize) -> bool {
        self.dim.is_none_or(|fixed| fixed == d)
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        (self.eval)(y)
    }
}

fn parse_params(body: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for part in body.split([',', ';']).map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parameter(format!("target parameter '{part}' is not key=value")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Parameter(format!("target parameter '{part}' is not numeric")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}
