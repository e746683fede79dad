//! Closed-form two-point characteristic-function estimators.
//!
//! Every method here evaluates the cumulant `ln φ(k)` at two positive
//! frequencies `k0 ≠ k1`. The real parts fix (α, γ):
//!
//! ```text
//! α̂ = [ln(−Re ln φ(k0)) − ln(−Re ln φ(k1))] / (ln k0 − ln k1)
//! γ̂ = exp{ [ln k0 · ln(−Re ln φ(k1)) − ln k1 · ln(−Re ln φ(k0))]
//!          / [ln(−Re ln φ(k0)) − ln(−Re ln φ(k1))] }
//! ```
//!
//! and the imaginary parts fix (β, δ) given (α̂, γ̂). The methods differ only
//! in how they choose `k0` and `k1`.

mod bibalan;
mod krutto;
mod proposed;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ecf::CumulantSource;
use crate::error::{Error, Result};
use crate::params::{clamp_to_domain, ClampOutcome, RawEstimate, StableParams};
use crate::quantile;
use crate::sample::Sample;

pub use bibalan::{bibalan_first_point, fit_bibalan, fit_bibalan_source};
pub use krutto::{fit_krutto, fit_krutto_source, level_point, KRUTTO_LEVELS};
pub use proposed::{
    eta_of_alpha, fit_proposed, fit_proposed_source, temp_gamma, weighted_distance, weighted_sensitivity_g,
    ProposedConfig,
};

/// |α̂ − 1| below which the α = 1 formulas for (β, δ) are used and α̂ is
/// reported as exactly 1.
pub const UNIT_ALPHA_BAND: f64 = 0.01;

/// |tan(πα/2)| below which β has no effect on the CF (α̂ at 2).
const SKEW_TAN_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Proposed,
    Bibalan,
    Krutto,
    Quantile,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Proposed, Method::Bibalan, Method::Krutto, Method::Quantile];

    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Bibalan => "bibalan",
            Method::Krutto => "krutto",
            Method::Quantile => "quantile",
        }
    }

    /// Fits `x` with default settings for this method.
    pub fn fit(self, x: &Sample) -> Result<EstimationReport> {
        match self {
            Method::Proposed => fit_proposed(x, &ProposedConfig::default()),
            Method::Bibalan => fit_bibalan(x),
            Method::Krutto => fit_krutto(x),
            Method::Quantile => quantile::fit_quantile(x, quantile::default_lookup()),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proposed" => Ok(Method::Proposed),
            "bibalan" => Ok(Method::Bibalan),
            "krutto" => Ok(Method::Krutto),
            "quantile" | "qm" | "mcculloch" => Ok(Method::Quantile),
            other => Err(Error::Parse(format!("unknown method '{other}'"))),
        }
    }
}

/// Anything the benchmark harness can fit a sample with.
pub trait Estimator: Send + Sync {
    fn label(&self) -> String;

    fn fit(&self, x: &Sample) -> Result<EstimationReport>;

    /// Whether the estimator is defined for data drawn from `truth`.
    fn supports(&self, _truth: &StableParams) -> bool {
        true
    }
}

impl Estimator for Method {
    fn label(&self) -> String {
        self.name().to_string()
    }

    fn fit(&self, x: &Sample) -> Result<EstimationReport> {
        Method::fit(*self, x)
    }

    fn supports(&self, truth: &StableParams) -> bool {
        *self != Method::Quantile || truth.alpha >= quantile::MIN_ALPHA
    }
}

/// Two distinct positive frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPoints {
    pub k0: f64,
    pub k1: f64,
}

impl TwoPoints {
    pub fn new(k0: f64, k1: f64) -> Result<Self> {
        if !(k0 > 0.0 && k1 > 0.0 && k0.is_finite() && k1.is_finite()) || k0 == k1 {
            return Err(Error::InvalidPoints { k0, k1 });
        }
        Ok(TwoPoints { k0, k1 })
    }
}

/// One intermediate estimate of the proposed algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Algorithm step that produced the estimate (3, 6, 9, then 9 again for extra rounds).
    pub step: u32,
    pub alpha: f64,
    pub gamma: f64,
    pub eta: f64,
    pub k0: f64,
    pub k1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub params: StableParams,
    pub method: Method,
    pub points: Option<TwoPoints>,
    pub eta: Option<f64>,
    pub gamma_temp: Option<f64>,
    pub iterations: Vec<IterationRecord>,
    pub clamp: ClampOutcome,
    pub n: usize,
    /// The α = 1 formulas were used for (β, δ).
    pub unit_alpha_branch: bool,
    pub warnings: Vec<String>,
}

impl EstimationReport {
    pub(crate) fn new(method: Method, clamp: ClampOutcome, n: usize) -> Self {
        EstimationReport {
            params: clamp.params,
            method,
            points: None,
            eta: None,
            gamma_temp: None,
            iterations: Vec::new(),
            clamp,
            n,
            unit_alpha_branch: false,
            warnings: Vec::new(),
        }
    }
}

/// `ln(−Re ln φ(k))`, failing when `Re ln φ(k) ≥ 0`.
fn log_neg_log_abs<S: CumulantSource + ?Sized>(src: &S, k: f64) -> Result<f64> {
    let la = src.log_abs(k);
    if !(la < 0.0) || !la.is_finite() {
        return Err(Error::DegenerateFrequency { k, log_abs: la });
    }
    Ok((-la).ln())
}

/// Raw (α̂, γ̂) from the real parts of the cumulant at two points.
pub fn estimate_alpha_gamma<S: CumulantSource + ?Sized>(src: &S, pts: TwoPoints) -> Result<(f64, f64)> {
    let l0 = log_neg_log_abs(src, pts.k0)?;
    let l1 = log_neg_log_abs(src, pts.k1)?;
    let (lk0, lk1) = (pts.k0.ln(), pts.k1.ln());
    let alpha = (l0 - l1) / (lk0 - lk1);
    let gamma = ((lk0 * l1 - lk1 * l0) / (l0 - l1)).exp();
    Ok((alpha, gamma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaDelta {
    pub beta: f64,
    pub delta: f64,
    pub unit_alpha_branch: bool,
    /// False when the skewness term vanishes (α̂ = 2) and β̂ was set to 0.
    pub beta_identified: bool,
}

/// Solves the two imaginary-part equations for (β, δ).
///
/// `scale_pow` multiplies `k^α tan(πα/2)` in the α ≠ 1 branch (γ̂^α̂, or ĉ for
/// the Bibalan variant); `scale_unit` multiplies `(2/π) k ln k` in the α = 1
/// branch.
pub fn beta_delta_from_imag(
    im0: f64,
    im1: f64,
    pts: TwoPoints,
    alpha: f64,
    scale_pow: f64,
    scale_unit: f64,
) -> BetaDelta {
    let TwoPoints { k0, k1 } = pts;
    if (alpha - 1.0).abs() >= UNIT_ALPHA_BAND {
        let (a0, a1) = (k0.powf(alpha), k1.powf(alpha));
        let den = a0 * k1 - a1 * k0;
        if den != 0.0 && den.is_finite() {
            let delta = (a1 * im0 - a0 * im1) / (k0 * a1 - k1 * a0);
            let tan = (FRAC_PI_2 * alpha).tan();
            let skew = scale_pow * tan * den;
            let num = k1 * im0 - k0 * im1;
            return if tan.abs() > SKEW_TAN_FLOOR && (num / skew).is_finite() {
                BetaDelta { beta: num / skew, delta, unit_alpha_branch: false, beta_identified: true }
            } else {
                BetaDelta { beta: 0.0, delta, unit_alpha_branch: false, beta_identified: false }
            };
        }
    }
    let (lk0, lk1) = (k0.ln(), k1.ln());
    let den = k0 * k1 * (lk1 - lk0);
    let beta = FRAC_PI_2 * (k1 * im0 - k0 * im1) / (scale_unit * den);
    let delta = (k1 * im0 * lk1 - k0 * im1 * lk0) / den;
    BetaDelta { beta, delta, unit_alpha_branch: true, beta_identified: true }
}

/// Raw (β̂, δ̂) from the imaginary parts of the cumulant, given (α̂, γ̂).
pub fn estimate_beta_delta<S: CumulantSource + ?Sized>(
    src: &S,
    pts: TwoPoints,
    alpha_hat: f64,
    gamma_hat: f64,
) -> Result<BetaDelta> {
    if !(alpha_hat > 0.0 && gamma_hat > 0.0) {
        return Err(Error::InvalidParams(format!(
            "beta/delta need positive alpha and gamma estimates (got {alpha_hat}, {gamma_hat})"
        )));
    }
    let im0 = src.cumulant(pts.k0).im;
    let im1 = src.cumulant(pts.k1).im;
    Ok(beta_delta_from_imag(im0, im1, pts, alpha_hat, gamma_hat.powf(alpha_hat), gamma_hat))
}

/// Common tail of every CF method: (β̂, δ̂) from the final points, warnings,
/// clamping, and the report.
pub(crate) fn finish_two_point<S: CumulantSource + ?Sized>(
    src: &S,
    method: Method,
    pts: TwoPoints,
    alpha: f64,
    gamma: f64,
    scale_pow: f64,
    scale_unit: f64,
    n: usize,
) -> Result<EstimationReport> {
    let c0 = src.cumulant(pts.k0);
    let c1 = src.cumulant(pts.k1);
    let bd = beta_delta_from_imag(c0.im, c1.im, pts, alpha, scale_pow, scale_unit);
    // the α = 1 location is only meaningful for a law with α exactly 1
    let reported_alpha = if bd.unit_alpha_branch { 1.0 } else { alpha };
    let clamp = clamp_to_domain(RawEstimate {
        alpha: reported_alpha,
        beta: bd.beta,
        gamma,
        delta: bd.delta,
    })?;
    let mut report = EstimationReport::new(method, clamp, n);
    report.points = Some(pts);
    report.unit_alpha_branch = bd.unit_alpha_branch;
    if bd.unit_alpha_branch {
        report.warnings.push(format!("alpha estimate {alpha:.6} within {UNIT_ALPHA_BAND} of 1: reported as 1 with the alpha = 1 formulas for beta and delta"));
    }
    if !bd.beta_identified {
        report.warnings.push("beta not identified (skewness term vanishes); reported as 0".into());
    }
    if src.principal_branch() && (c0.im.abs() > FRAC_PI_2 || c1.im.abs() > FRAC_PI_2) {
        report.warnings.push(format!(
            "|arg cf| exceeds pi/2 at the chosen points ({:.3}, {:.3}); the principal branch may have wrapped (|arg| <= {PI:.4})",
            c0.im, c1.im
        ));
    }
    Ok(report)
}

/// Runs the generic two-point scheme at fixed points.
pub fn fit_two_point<S: CumulantSource + ?Sized>(src: &S, pts: TwoPoints, method: Method) -> Result<EstimationReport> {
    let (alpha, gamma) = estimate_alpha_gamma(src, pts)?;
    finish_two_point(src, method, pts, alpha, gamma, gamma.powf(alpha), gamma, src.sample_len())
}
