//! Flexible two-point selection.
//!
//! `k1` sits where the absolute CF equals `e^{-1}`, i.e. `k1 = 1/γ`. `k0 = η/γ`
//! where `η` is the smaller positive root of
//!
//! ```text
//! g(α, η) = d/dη { (exp(−η^{α+Δα}) − exp(−η^α)) · exp(−τη) }
//!         = (αη^{α−1} + τ) e^{−η^α − τη} − ((α+Δα)η^{α+Δα−1} + τ) e^{−η^{α+Δα} − τη}
//! ```
//!
//! the point of maximum weighted sensitivity of `|φ|` to α. Because η depends
//! on the unknown α, estimates of α and η are alternated starting from a
//! rough scale found by solving `ln|φ̂(1/γ̃)| = −1`.

use serde::{Deserialize, Serialize};

use super::{estimate_alpha_gamma, finish_two_point, EstimationReport, IterationRecord, Method, TwoPoints};
use crate::ecf::CumulantSource;
use crate::error::{Error, Result};
use crate::numerics::{find_root, DEFAULT_ROOT_TOL};
use crate::params::ESTIMATE_FLOOR;
use crate::sample::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProposedConfig {
    /// Initial ratio `k0/k1` before any α estimate exists.
    pub xi: f64,
    pub delta_alpha: f64,
    /// Decay of the weight `w(η) = exp(−τη)`.
    pub tau: f64,
    /// Number of η/estimate alternations (2 = the standard ten-step algorithm).
    pub refinement_rounds: usize,
    pub root_tol: f64,
}

impl Default for ProposedConfig {
    fn default() -> Self {
        ProposedConfig {
            xi: 0.5,
            delta_alpha: 0.01,
            tau: 2.5,
            refinement_rounds: 2,
            root_tol: DEFAULT_ROOT_TOL,
        }
    }
}

impl ProposedConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return Err(Error::InvalidParams(format!("xi = {} not in (0, 1)", self.xi)));
        }
        if !(self.delta_alpha > 0.0 && self.tau > 0.0 && self.root_tol > 0.0) || self.refinement_rounds < 1 {
            return Err(Error::InvalidParams(
                "delta_alpha, tau and root_tol must be positive and refinement_rounds >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Weighted gap `(e^{−η^{α+Δα}} − e^{−η^α}) e^{−τη}` between the absolute CFs
/// of unit-scale laws with tail indices α and α + Δα.
pub fn weighted_distance(alpha: f64, eta: f64, cfg: &ProposedConfig) -> f64 {
    let a2 = alpha + cfg.delta_alpha;
    ((-eta.powf(a2)).exp() - (-eta.powf(alpha)).exp()) * (-cfg.tau * eta).exp()
}

/// η-derivative of [`weighted_distance`].
pub fn weighted_sensitivity_g(alpha: f64, eta: f64, cfg: &ProposedConfig) -> f64 {
    let tau = cfg.tau;
    let a2 = alpha + cfg.delta_alpha;
    let term = |a: f64| (a * eta.powf(a - 1.0) + tau) * (-eta.powf(a) - tau * eta).exp();
    term(alpha) - term(a2)
}

const ETA_PROBES: usize = 200;
const ETA_LO: f64 = 1e-6;
const ETA_HI: f64 = 1.0;

/// Smaller positive root of `g(α, η) = 0`, bracketed by a log-spaced sign scan
/// over (1e−6, 1).
pub fn eta_of_alpha(alpha: f64, cfg: &ProposedConfig) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::PointSelection { alpha });
    }
    let g = |eta: f64| weighted_sensitivity_g(alpha, eta, cfg);
    let step = (ETA_HI / ETA_LO).ln() / (ETA_PROBES - 1) as f64;
    let mut prev_eta = ETA_LO;
    let mut prev_g = g(prev_eta);
    for i in 1..ETA_PROBES {
        let eta = if i == ETA_PROBES - 1 {
            ETA_HI
        } else {
            ETA_LO * (step * i as f64).exp()
        };
        let gi = g(eta);
        if prev_g == 0.0 {
            return Ok(prev_eta);
        }
        if prev_g.signum() != gi.signum() {
            let r = find_root(g, prev_eta, eta, cfg.root_tol * prev_eta.min(1.0))?;
            return Ok(r.root);
        }
        prev_eta = eta;
        prev_g = gi;
    }
    Err(Error::PointSelection { alpha })
}

/// Expansion steps allowed when the initial scale bracket misses the root.
const SCALE_EXPANSIONS: i32 = 3;

/// Rough scale γ̃ solving `ln|φ̂(1/γ̃)| = −1`.
///
/// Starts from `[s/100, 100s]` with `s` the sample spread, widening by ×10 up
/// to three times each way, and walks down from the large-scale end so the
/// crossing closest to the origin of the frequency axis is the one found.
pub fn temp_gamma<S: CumulantSource + ?Sized>(src: &S, root_tol: f64) -> Result<f64> {
    let s = src.scale_hint();
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::ScaleSearch("sample has no spread (constant data)".into()));
    }
    let h = |gamma: f64| src.log_abs(1.0 / gamma) + 1.0;

    let mut hi = 100.0 * s;
    let mut h_hi = h(hi);
    let mut expansions = 0;
    while !(h_hi > 0.0) && expansions < SCALE_EXPANSIONS {
        hi *= 10.0;
        h_hi = h(hi);
        expansions += 1;
    }
    if !(h_hi > 0.0) {
        return Err(Error::ScaleSearch(format!("ln|cf(1/gamma)| stays below -1 up to gamma = {hi:e}")));
    }
    let floor = s / 100.0 / 10f64.powi(SCALE_EXPANSIONS);
    let mut upper = hi;
    loop {
        let lower = (upper / 2.0).max(floor);
        let h_lower = h(lower);
        if h_lower <= 0.0 {
            if h_lower == 0.0 {
                return Ok(lower);
            }
            let r = find_root(h, lower, upper, root_tol * s)?;
            return Ok(r.root);
        }
        if lower <= floor {
            return Err(Error::ScaleSearch(format!(
                "ln|cf(1/gamma)| stays above -1 down to gamma = {floor:e}"
            )));
        }
        upper = lower;
    }
}

/// Runs the proposed algorithm on the empirical CF of `x`.
pub fn fit_proposed(x: &Sample, cfg: &ProposedConfig) -> Result<EstimationReport> {
    fit_proposed_source(x, cfg)
}

/// Runs the proposed algorithm on any cumulant source.
pub fn fit_proposed_source<S: CumulantSource + ?Sized>(src: &S, cfg: &ProposedConfig) -> Result<EstimationReport> {
    cfg.validate()?;
    let mut trace: Vec<IterationRecord> = Vec::new();
    let fail = |e: Error, trace: &Vec<IterationRecord>| Error::Proposed {
        source: Box::new(e),
        trace: trace.clone(),
    };
    let mut warnings = Vec::new();

    // Step 1
    let gamma_temp = temp_gamma(src, cfg.root_tol).map_err(|e| fail(e, &trace))?;

    // Steps 2-3
    let mut eta = cfg.xi;
    let mut pts = TwoPoints::new(cfg.xi / gamma_temp, 1.0 / gamma_temp).map_err(|e| fail(e, &trace))?;
    let (mut alpha, mut gamma) = estimate_alpha_gamma(src, pts).map_err(|e| fail(e, &trace))?;
    trace.push(IterationRecord { step: 3, alpha, gamma, eta, k0: pts.k0, k1: pts.k1 });

    // Steps 4-6, 7-9, and any further alternations
    for round in 0..cfg.refinement_rounds {
        if !(alpha.is_finite() && gamma.is_finite() && gamma > 0.0) {
            return Err(fail(Error::NonFinite { field: "alpha" }, &trace));
        }
        let alpha_for_eta = alpha.clamp(ESTIMATE_FLOOR, 2.0);
        match eta_of_alpha(alpha_for_eta, cfg) {
            Ok(e) => eta = e,
            Err(e) => warnings.push(format!("{e}; keeping eta = {eta}")),
        }
        pts = TwoPoints::new(eta / gamma, 1.0 / gamma).map_err(|e| fail(e, &trace))?;
        let est = estimate_alpha_gamma(src, pts).map_err(|e| fail(e, &trace))?;
        alpha = est.0;
        gamma = est.1;
        let step = if round == 0 { 6 } else { 9 };
        trace.push(IterationRecord { step, alpha, gamma, eta, k0: pts.k0, k1: pts.k1 });
    }

    // Step 10
    let mut report = finish_two_point(src, Method::Proposed, pts, alpha, gamma, gamma.powf(alpha), gamma, src.sample_len())
        .map_err(|e| fail(e, &trace))?;
    report.eta = Some(eta);
    report.gamma_temp = Some(gamma_temp);
    report.iterations = trace;
    report.warnings.extend(warnings);
    Ok(report)
}
