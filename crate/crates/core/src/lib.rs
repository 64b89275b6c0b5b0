//! Discrete least-squares approximation on unbounded domains.
//!
//! The crate builds multivariate Hermite/Laguerre polynomial and function
//! spaces over total-degree or tensor-product index sets, draws random
//! evaluation points (Gaussian, exponential, or uniform points pushed through
//! an algebraic/logarithmic map), solves the resulting least-squares problem,
//! and wraps everything into experiment runners for conditioning, convergence
//! and uncertainty-quantification studies.
//!
//! Module map:
//!
//! - [`multiindex`]: TP/TD index sets in graded lexicographic order.
//! - [`basis`]: 1D recurrences, tensorized rows, per-dimension scaling.
//! - [`sampling`]: seeded point generation and the mapping family.
//! - [`linalg`]: dense QR, Cholesky, Jacobi eigensolver, Gauss rules.
//! - [`lsq`]: design matrices, fits, scaling rules, error metrics.
//! - [`uqmodels`]: random ODE and 1D elliptic model problems.
//! - [`harness`]: experiment runners and CSV output.
//!
//! ```
//! use hflsq::basis::{BasisFamily, BasisSpec};
//! use hflsq::lsq::{fit, linf_error, Solver};
//! use hflsq::multiindex::{build_index_set, SpaceKind};
//! use hflsq::sampling::{sample, Distribution, MappingSpec};
//!
//! # fn main() -> hflsq::Result<()> {
//! let spec = BasisSpec::unscaled(BasisFamily::HermiteFunc, build_index_set(SpaceKind::TotalDegree, 20, 1)?);
//! let pts = sample(Distribution::MappedUniform(MappingSpec::logarithmic(8.0)?), 6 * spec.len(), 1, 42)?;
//! let target = |y: &[f64]| 2f64.powf(-0.6 * y[0] * y[0]);
//! let values: Vec<f64> = pts.rows().map(target).collect();
//! let f = fit(&spec, &pts, &values, Solver::Qr)?;
//! assert!(f.cond() < 100.0);
//! assert!(linf_error(&f, &target, 4000, 7)? < 1e-6);
//! # Ok(())
//! # }
//! ```

pub mod basis;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod lsq;
pub mod multiindex;
pub mod sampling;
pub mod uqmodels;

pub use error::{Error, Result};
