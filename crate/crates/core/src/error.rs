use thiserror::Error;

use crate::estimators::IterationRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid stable parameters: {0}")]
    InvalidParams(String),

    /// An estimator produced NaN or infinity for a parameter.
    #[error("estimation failed numerically: {field} is not finite")]
    NonFinite { field: &'static str },

    #[error("the Gaussian case (alpha = 2) has no power-law tail")]
    NoPowerTail,

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("insufficient sample: {n} observations, at least {required} required")]
    InsufficientSample { n: usize, required: usize },

    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("degenerate bracket [{lo}, {hi}]")]
    DegenerateBracket { lo: f64, hi: f64 },

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    /// The empirical characteristic function is non-informative at `k`.
    #[error("degenerate frequency k = {k}: ln|cf| = {log_abs}; choose a smaller frequency")]
    DegenerateFrequency { k: f64, log_abs: f64 },

    #[error("frequencies must be positive and distinct (k0 = {k0}, k1 = {k1})")]
    InvalidPoints { k0: f64, k1: f64 },

    #[error("scale search failed: {0}")]
    ScaleSearch(String),

    #[error("point selection failed for alpha = {alpha}: g(alpha, eta) has no sign change")]
    PointSelection { alpha: f64 },

    #[error("level ln|cf(k)| = {level} unreachable")]
    LevelUnreachable { level: f64 },

    #[error("degenerate scale c = {c}; rescale the data (e.g. multiply returns by 100) and refit")]
    DegenerateScale { c: f64 },

    /// A proposed-method fit failed part way; `trace` holds the steps completed so far.
    #[error("proposed estimator failed after {} step(s): {source}", trace.len())]
    Proposed {
        source: Box<Error>,
        trace: Vec<IterationRecord>,
    },

    #[error("quantile method: {0}")]
    Quantile(String),

    #[error("study failed: every replication errored for method {method}")]
    AllReplicationsFailed { method: String },

    #[error("invalid study configuration: {0}")]
    InvalidStudy(String),

    #[error("parse error: {0}")]
    Parse(String),
}
