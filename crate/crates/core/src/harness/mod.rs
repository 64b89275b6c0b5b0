//! Experiment runners, configuration and CSV emission.
//!
//! Every runner is deterministic given its configuration: each trial (or
//! each order `q`) draws from its own stream derived from the base seed, and
//! parallel results are gathered in index order before any reduction.

mod config;
mod csv;
mod experiments;
mod selftest;
mod stability;
mod targets;

pub use config::{parse_config_text, DistKind, ExperimentConfig, ExperimentKind, ODE_DEFAULT_RADIUS};
pub use csv::{format_float, Cell, CsvTable};
pub use experiments::{
    condition_columns, convergence_columns, convergence_fit, run_condition_experiment, run_convergence_experiment, run_experiment,
    run_uq_experiment, uq_columns, uq_point,
};
pub use selftest::{run_selftest, SelfTestCheck};
pub use stability::{
    c_half, kappa, m_min, run_stability_check, stability_columns, StabilityCheckReport, STABILITY_THRESHOLD,
};
pub use targets::{TargetFunction, REGISTERED_TARGETS};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Metadata lines common to all CSV outputs.
pub fn standard_metadata(experiment: &str, seed: u64, config: &[(String, String)], timestamp: bool) -> Vec<(String, String)> {
    let mut meta = vec![
        ("version".to_string(), VERSION.to_string()),
        ("experiment".to_string(), experiment.to_string()),
        ("seed".to_string(), seed.to_string()),
        ("rng".to_string(), crate::sampling::RNG_ALGORITHM.to_string()),
    ];
    for (k, v) in config {
        meta.push((format!("config.{k}"), v.clone()));
    }
    if timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        meta.push(("timestamp_unix".to_string(), secs.to_string()));
    }
    meta
}
