//! Stable-law parameter types, parameterization conversion and domain clamping.
//!
//! Parameters default to the one-parameterization `S(α, β, γ, δ; 1)` whose
//! characteristic function is
//!
//! ```text
//! φ(k) = exp{ iδk − γ^α |k|^α (1 − iβ sgn(k) ω(k, α)) }
//! ω(k, α) = tan(πα/2)        α ≠ 1
//!         = −(2/π) ln|k|     α = 1
//! ```
//!
//! The zero-parameterization differs only in the location parameter.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Sample;

/// Lower bound applied to α and γ estimates when clamping.
pub const ESTIMATE_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamForm {
    #[default]
    OneParam,
    ZeroParam,
}

/// The four stable-law parameters with their parameterization tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    #[serde(default)]
    pub form: ParamForm,
}

impl StableParams {
    /// Validated one-parameterization parameters.
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        Self::with_form(alpha, beta, gamma, delta, ParamForm::OneParam)
    }

    pub fn with_form(alpha: f64, beta: f64, gamma: f64, delta: f64, form: ParamForm) -> Result<Self> {
        let p = StableParams {
            alpha,
            beta,
            gamma,
            delta,
            form,
        };
        p.validate()?;
        Ok(p)
    }

    /// Standard symmetric law `S(α, 0, 1, 0)`.
    pub fn standard(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0, 1.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::InvalidParams(format!("alpha = {} not in (0, 2]", self.alpha)));
        }
        if !(-1.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidParams(format!("beta = {} not in [-1, 1]", self.beta)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParams(format!("gamma = {} must be positive", self.gamma)));
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParams(format!("delta = {} must be finite", self.delta)));
        }
        Ok(())
    }

    /// Location shift `δ₀ − δ₁` between the two parameterizations.
    fn location_shift(&self) -> f64 {
        if self.alpha == 1.0 {
            self.beta * FRAC_2_PI * self.gamma * self.gamma.ln()
        } else {
            self.beta * self.gamma * (PI * self.alpha / 2.0).tan()
        }
    }

    /// Re-expresses the parameters in `target` form. Only δ changes.
    pub fn convert(&self, target: ParamForm) -> StableParams {
        let delta = match (self.form, target) {
            (ParamForm::OneParam, ParamForm::ZeroParam) => self.delta + self.location_shift(),
            (ParamForm::ZeroParam, ParamForm::OneParam) => self.delta - self.location_shift(),
            _ => self.delta,
        };
        StableParams {
            delta,
            form: target,
            ..*self
        }
    }

    pub fn to_one_param(&self) -> StableParams {
        self.convert(ParamForm::OneParam)
    }

    /// Exact cumulant `ln φ(k)` on its continuous branch (no 2π wrapping).
    pub fn cumulant(&self, k: f64) -> Complex64 {
        let p = self.to_one_param();
        if k == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let ak = k.abs();
        if p.alpha == 1.0 {
            let re = -p.gamma * ak;
            let im = p.delta * k - FRAC_2_PI * p.beta * p.gamma * k * ak.ln();
            Complex64::new(re, im)
        } else {
            let mag = (p.gamma * ak).powf(p.alpha);
            let im = p.delta * k + mag * p.beta * k.signum() * (PI * p.alpha / 2.0).tan();
            Complex64::new(-mag, im)
        }
    }

    /// Characteristic function `φ(k)`.
    pub fn characteristic_function(&self, k: f64) -> Complex64 {
        self.cumulant(k).exp()
    }
}

impl fmt::Display for StableParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "S({}, {}, {}, {}; {})",
            self.alpha,
            self.beta,
            self.gamma,
            self.delta,
            match self.form {
                ParamForm::OneParam => 1,
                ParamForm::ZeroParam => 0,
            }
        )
    }
}

pub fn convert_parameterization(p: &StableParams, target: ParamForm) -> StableParams {
    p.convert(target)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamField {
    Alpha,
    Beta,
    Gamma,
    Delta,
}

impl ParamField {
    pub const ALL: [ParamField; 4] = [ParamField::Alpha, ParamField::Beta, ParamField::Gamma, ParamField::Delta];

    pub fn name(self) -> &'static str {
        match self {
            ParamField::Alpha => "alpha",
            ParamField::Beta => "beta",
            ParamField::Gamma => "gamma",
            ParamField::Delta => "delta",
        }
    }

    pub fn get(self, p: &StableParams) -> f64 {
        match self {
            ParamField::Alpha => p.alpha,
            ParamField::Beta => p.beta,
            ParamField::Gamma => p.gamma,
            ParamField::Delta => p.delta,
        }
    }

    pub fn set(self, p: &mut StableParams, value: f64) {
        match self {
            ParamField::Alpha => p.alpha = value,
            ParamField::Beta => p.beta = value,
            ParamField::Gamma => p.gamma = value,
            ParamField::Delta => p.delta = value,
        }
    }
}

impl fmt::Display for ParamField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ParamField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "alpha" => Ok(ParamField::Alpha),
            "beta" => Ok(ParamField::Beta),
            "gamma" => Ok(ParamField::Gamma),
            "delta" => Ok(ParamField::Delta),
            other => Err(Error::Parse(format!("unknown parameter '{other}'"))),
        }
    }
}

/// Unconstrained estimator output, before clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawEstimate {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl From<StableParams> for RawEstimate {
    fn from(p: StableParams) -> Self {
        RawEstimate {
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            delta: p.delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClampOutcome {
    pub params: StableParams,
    /// Fields modified by clamping, in α, β, γ, δ order.
    pub clamped: Vec<ParamField>,
    pub raw: RawEstimate,
}

impl ClampOutcome {
    pub fn was_clamped(&self, field: ParamField) -> bool {
        self.clamped.contains(&field)
    }
}

/// Moves an estimate onto the parameter domain: β to the nearest border of
/// [−1, 1], α into [0.01, 2], γ to at least 0.01. δ is never touched.
pub fn clamp_to_domain(raw: RawEstimate) -> Result<ClampOutcome> {
    for (field, v) in [
        ("alpha", raw.alpha),
        ("beta", raw.beta),
        ("gamma", raw.gamma),
        ("delta", raw.delta),
    ] {
        if !v.is_finite() {
            return Err(Error::NonFinite { field });
        }
    }
    let alpha = raw.alpha.clamp(ESTIMATE_FLOOR, 2.0);
    let beta = raw.beta.clamp(-1.0, 1.0);
    let gamma = raw.gamma.max(ESTIMATE_FLOOR);
    let params = StableParams {
        alpha,
        beta,
        gamma,
        delta: raw.delta,
        form: ParamForm::OneParam,
    };
    let mut clamped = Vec::new();
    if alpha != raw.alpha {
        clamped.push(ParamField::Alpha);
    }
    if beta != raw.beta {
        clamped.push(ParamField::Beta);
    }
    if gamma != raw.gamma {
        clamped.push(ParamField::Gamma);
    }
    Ok(ClampOutcome { params, clamped, raw })
}

/// `(x − δ) / γ` elementwise.
pub fn standardize_sample(x: &Sample, p: &StableParams) -> Sample {
    x.map_affine(1.0 / p.gamma, -p.delta / p.gamma)
}

/// `c_α = sin(πα/2) Γ(α) / π`, the constant of the power-law tail
/// `P(X > x) ≈ c_α γ^α (1 + β) x^{−α}`.
pub fn tail_constant(alpha: f64) -> Result<f64> {
    if alpha == 2.0 {
        return Err(Error::NoPowerTail);
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidParams(format!("alpha = {alpha} not in (0, 2)")));
    }
    Ok((FRAC_PI_2 * alpha).sin() * statrs::function::gamma::gamma(alpha) / PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn conversion_examples() {
        let p = StableParams::new(1.5, 0.0, 1.0, 0.3).unwrap();
        assert_eq!(p.convert(ParamForm::ZeroParam).delta, 0.3);

        let p = StableParams::new(1.0, 0.5, 1.0, 0.0).unwrap();
        assert_eq!(p.convert(ParamForm::ZeroParam).delta, 0.0);

        let p = StableParams::new(1.5, 0.5, 2.0, 0.0).unwrap();
        let z = p.convert(ParamForm::ZeroParam);
        assert_relative_eq!(z.delta, -1.0, epsilon = 1e-12);
        assert_eq!((z.alpha, z.beta, z.gamma), (1.5, 0.5, 2.0));
        assert_eq!(z.form, ParamForm::ZeroParam);
    }

    #[test]
    fn clamp_examples() {
        let out = clamp_to_domain(RawEstimate { alpha: 2.3, beta: 0.4, gamma: 1.0, delta: 0.0 }).unwrap();
        assert_eq!(out.params.alpha, 2.0);
        assert_eq!(out.clamped, vec![ParamField::Alpha]);

        let out = clamp_to_domain(RawEstimate { alpha: 1.5, beta: 1.2, gamma: 0.005, delta: 0.0 }).unwrap();
        assert_eq!(out.params.beta, 1.0);
        assert_eq!(out.params.gamma, 0.01);
        assert_eq!(out.clamped, vec![ParamField::Beta, ParamField::Gamma]);

        let out = clamp_to_domain(RawEstimate { alpha: 1.5, beta: 0.0, gamma: 1.0, delta: 0.0 }).unwrap();
        assert!(out.clamped.is_empty());
        assert_eq!(RawEstimate::from(out.params), out.raw);
    }

    #[test]
    fn clamp_floors_small_alpha_and_rejects_nan() {
        let out = clamp_to_domain(RawEstimate { alpha: -0.3, beta: -4.0, gamma: 2.0, delta: 7.0 }).unwrap();
        assert_eq!(out.params.alpha, 0.01);
        assert_eq!(out.params.beta, -1.0);
        assert_eq!(out.params.delta, 7.0);
        assert!(matches!(
            clamp_to_domain(RawEstimate { alpha: 1.0, beta: 0.0, gamma: 1.0, delta: f64::NAN }),
            Err(Error::NonFinite { field: "delta" })
        ));
    }

    #[test]
    fn tail_constant_values() {
        assert_relative_eq!(tail_constant(1.0).unwrap(), 1.0 / PI, epsilon = 1e-14);
        let expected = (PI / 4.0).sin() * PI.sqrt() / PI;
        assert_relative_eq!(tail_constant(0.5).unwrap(), expected, epsilon = 1e-12);
        assert_relative_eq!(tail_constant(0.5).unwrap(), 0.398942, epsilon = 1e-6);
        assert!(matches!(tail_constant(2.0), Err(Error::NoPowerTail)));
        let mut prev = tail_constant(0.1).unwrap();
        for i in 2..20 {
            let c = tail_constant(i as f64 / 10.0).unwrap();
            assert!(c > 0.0 && (c - prev).abs() < 0.1);
            prev = c;
        }
    }

    #[test]
    fn standardize_examples() {
        let p = StableParams::new(1.5, 0.0, 2.0, 1.0).unwrap();
        let x = Sample::new(vec![3.0, 3.0]).unwrap();
        assert_eq!(standardize_sample(&x, &p).values(), &[1.0, 1.0]);
        let id = StableParams::new(1.5, 0.0, 1.0, 0.0).unwrap();
        let x = Sample::new(vec![0.0, 2.0]).unwrap();
        assert_eq!(standardize_sample(&x, &id).values(), &[0.0, 2.0]);
    }

    #[test]
    fn cumulant_matches_closed_forms() {
        let cauchy = StableParams::new(1.0, 0.0, 2.0, 0.5).unwrap();
        let c = cauchy.cumulant(1.5);
        assert_relative_eq!(c.re, -3.0, epsilon = 1e-15);
        assert_relative_eq!(c.im, 0.75, epsilon = 1e-15);
        // conjugate symmetry
        let p = StableParams::new(1.3, 0.7, 1.4, -0.2).unwrap();
        let a = p.cumulant(0.8);
        let b = p.cumulant(-0.8);
        assert_relative_eq!(a.re, b.re, epsilon = 1e-15);
        assert_relative_eq!(a.im, -b.im, epsilon = 1e-15);
        // zero form gives the same law
        let z = p.convert(ParamForm::ZeroParam);
        assert_relative_eq!(z.cumulant(0.8).im, a.im, epsilon = 1e-12);
    }

    fn params_strategy() -> impl Strategy<Value = StableParams> {
        (0.02f64..2.0, -1.0f64..1.0, 0.01f64..100.0, -50.0f64..50.0)
            .prop_map(|(a, b, g, d)| StableParams::new(a, b, g, d).unwrap())
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(p in params_strategy(), unit in proptest::bool::ANY) {
            let p = if unit { StableParams { alpha: 1.0, ..p } } else { p };
            let back = p.convert(ParamForm::ZeroParam).convert(ParamForm::OneParam);
            prop_assert_eq!((back.alpha, back.beta, back.gamma), (p.alpha, p.beta, p.gamma));
            let scale = 1.0 + p.delta.abs() + p.location_shift().abs();
            prop_assert!((back.delta - p.delta).abs() <= 1e-12 * scale);
        }

        #[test]
        fn clamp_is_idempotent(a in -1.0f64..3.0, b in -2.0f64..2.0, g in -1.0f64..5.0, d in -5.0f64..5.0) {
            let once = clamp_to_domain(RawEstimate { alpha: a, beta: b, gamma: g, delta: d }).unwrap();
            let twice = clamp_to_domain(once.params.into()).unwrap();
            prop_assert_eq!(twice.params, once.params);
            prop_assert!(twice.clamped.is_empty());
            for f in ParamField::ALL {
                let raw = f.get(&StableParams { alpha: a, beta: b, gamma: g, delta: d, form: ParamForm::OneParam });
                prop_assert_eq!(once.clamped.contains(&f), raw != f.get(&once.params));
            }
        }

        #[test]
        fn standardize_inverts(xs in proptest::collection::vec(-1e3f64..1e3, 2..40), p in params_strategy()) {
            let x = Sample::new(xs.clone()).unwrap();
            let z = standardize_sample(&x, &p);
            for (orig, s) in xs.iter().zip(z.values()) {
                let back = s * p.gamma + p.delta;
                prop_assert!((back - orig).abs() <= 1e-12 * (1.0 + orig.abs() + p.delta.abs()));
            }
        }
    }
}
