//! Empirical characteristic function `φ̂(k) = (1/N) Σ exp(i k X_n)` and the
//! cumulant quantities the two-point estimators consume.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::StableParams;
use crate::sample::Sample;

/// Empirical CF evaluated at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfPoint {
    pub k: f64,
    pub value: Complex64,
    /// `ln|φ̂(k)|`.
    pub log_abs: f64,
    /// Principal argument of `φ̂(k)`, in (−π, π].
    pub imag_log: f64,
}

impl CfPoint {
    /// The argument is far enough from zero that the true cumulant may have
    /// wrapped past ±π.
    pub fn may_wrap(&self) -> bool {
        self.imag_log.abs() > FRAC_PI_2
    }
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(self) -> f64 {
        self.sum + self.comp
    }
}

/// `(1/N) Σ exp(i k X_n)` for any real `k`, including negative frequencies.
pub(crate) fn ecf_value(x: &Sample, k: f64) -> Complex64 {
    let mut re = CompensatedSum::default();
    let mut im = CompensatedSum::default();
    for &v in x.values() {
        let (s, c) = (k * v).sin_cos();
        re.add(c);
        im.add(s);
    }
    let n = x.len() as f64;
    Complex64::new(re.total() / n, im.total() / n)
}

fn principal_arg(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a == -PI {
        PI
    } else {
        a
    }
}

pub fn ecf_at(x: &Sample, k: f64) -> Result<CfPoint> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidPoints { k0: k, k1: k });
    }
    let value = ecf_value(x, k);
    Ok(CfPoint {
        k,
        value,
        log_abs: value.norm().ln(),
        imag_log: principal_arg(value),
    })
}

fn non_vanishing(x: &Sample, k: f64) -> Result<CfPoint> {
    let p = ecf_at(x, k)?;
    if p.value.norm() == 0.0 {
        return Err(Error::DegenerateFrequency { k, log_abs: f64::NEG_INFINITY });
    }
    Ok(p)
}

/// `ln|φ̂(k)|`; fails when the ECF vanishes.
pub fn log_abs_ecf(x: &Sample, k: f64) -> Result<f64> {
    Ok(non_vanishing(x, k)?.log_abs)
}

/// Principal argument of `φ̂(k)`; fails when the ECF vanishes.
pub fn imag_log_ecf(x: &Sample, k: f64) -> Result<f64> {
    Ok(non_vanishing(x, k)?.imag_log)
}

/// Anything that can supply the cumulant `ln φ(k)` at positive frequencies:
/// the empirical CF of a sample, or an exact stable CF.
pub trait CumulantSource {
    /// `ln|φ(k)|`, possibly `−∞` where the CF vanishes.
    fn log_abs(&self, k: f64) -> f64;

    /// `ln φ(k)`: real part `ln|φ(k)|`, imaginary part the argument.
    fn cumulant(&self, k: f64) -> Complex64;

    /// A rough scale of the underlying law, used to seed bracket searches.
    fn scale_hint(&self) -> f64 {
        1.0
    }

    /// Whether the imaginary part is a principal-branch value that may wrap.
    fn principal_branch(&self) -> bool {
        false
    }

    /// Number of observations behind the estimate, 0 for an exact CF.
    fn sample_len(&self) -> usize {
        0
    }
}

impl CumulantSource for Sample {
    fn log_abs(&self, k: f64) -> f64 {
        ecf_value(self, k).norm().ln()
    }

    fn cumulant(&self, k: f64) -> Complex64 {
        let v = ecf_value(self, k);
        Complex64::new(v.norm().ln(), principal_arg(v))
    }

    fn scale_hint(&self) -> f64 {
        self.spread()
    }

    fn principal_branch(&self) -> bool {
        true
    }

    fn sample_len(&self) -> usize {
        self.len()
    }
}

/// The exact characteristic function of a stable law; its cumulant is
/// evaluated on the continuous branch.
impl CumulantSource for StableParams {
    fn log_abs(&self, k: f64) -> f64 {
        StableParams::cumulant(self, k).re
    }

    fn cumulant(&self, k: f64) -> Complex64 {
        StableParams::cumulant(self, k)
    }
}
