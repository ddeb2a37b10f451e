//! Estimation and asymptotic inference for one-dimensional Wasserstein
//! costs `W_c(F, G) = ∫₀¹ c(F⁻¹(u), G⁻¹(u)) du` from paired samples.
//!
//! ```
//! use wclt::{confidence_interval, empirical_cost, exact_cost, sigma2};
//! use wclt::{CostFunction, Coupling, Distribution, QuadratureConfig};
//!
//! # fn main() -> wclt::Result<()> {
//! let f: Distribution = "gaussian(0,1)".parse()?;
//! let g: Distribution = "gaussian(1,2)".parse()?;
//! let c = CostFunction::Power { alpha: 2.0 };
//! let cp = Coupling::Gaussian { r: 0.5 };
//!
//! let sample = cp.sample_pairs(&f, &g, 10_000, 42)?;
//! let est = empirical_cost(&sample, &c);
//! let truth = exact_cost(&f, &g, &c, &QuadratureConfig::default())?.value;
//! let s2 = sigma2(&f, &g, &c, &cp, &QuadratureConfig::for_variance())?.value;
//! let (lo, hi) = confidence_interval(est, s2, sample.n(), 0.95)?;
//! assert!((truth - 2.0).abs() < 1e-9);
//! assert!(lo < hi);
//! # Ok(())
//! # }
//! ```

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assumptions;
pub mod cost;
pub mod coupling;
mod descriptor;
pub mod dist;
pub mod error;
pub mod estimate;
pub mod mc;
pub mod quad;
pub mod special;
pub mod variance;

pub use assumptions::{check_all, check_cfg, check_csfg, check_fg, check_tail_sufficient, AssumptionReport, Check, CheckOptions, Status};
pub use cost::CostFunction;
pub use coupling::Coupling;
pub use dist::{Distribution, TailClass};
pub use error::{Error, Result};
pub use estimate::{empirical_cost, exact_cost, trimmed_empirical_cost, EstimateReport, PairedSample};
pub use mc::{compare_trimmed, ks_statistic, run_clt_experiment, run_consistency_sweep, MCConfig, MCReport, SigmaSource, TrimEps};
pub use quad::QuadratureConfig;
pub use variance::{confidence_interval, plug_in_sigma2, sigma2, sigma2_one_sample, Side, VarianceMethod, VarianceResult};
