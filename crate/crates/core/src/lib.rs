//! Parameter estimation for α-stable distributions.
//!
//! Four estimators are provided: a two-point characteristic-function method
//! with data-driven point selection ([`estimators::fit_proposed`]), two
//! fixed-rule two-point baselines ([`estimators::fit_krutto`],
//! [`estimators::fit_bibalan`]) and McCulloch's quantile method
//! ([`quantile::fit_quantile`]). [`dist`] evaluates stable densities and
//! distribution functions and draws random variates; [`bench`] runs
//! Monte-Carlo accuracy studies.
//!
//! ```
//! use stablefit::{sample_stable, Method, StableParams};
//!
//! let truth = StableParams::new(1.5, 0.0, 1.0, 0.0).unwrap();
//! let x = sample_stable(&truth, 5000, 42).unwrap();
//! let fit = Method::Proposed.fit(&x).unwrap();
//! assert!((fit.params.alpha - 1.5).abs() < 0.1);
//! ```

pub mod bench;
pub mod data;
pub mod dist;
pub mod ecf;
pub mod error;
pub mod estimators;
pub mod numerics;
pub mod params;
pub mod quantile;
pub mod report;
pub mod sample;

pub use dist::{sample_stable, DistEvalConfig, StableDist};
pub use error::{Error, Result};
pub use estimators::{EstimationReport, Estimator, Method, ProposedConfig, TwoPoints};
pub use params::{convert_parameterization, ParamField, ParamForm, StableParams};
pub use sample::Sample;
