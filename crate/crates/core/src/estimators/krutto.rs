//! Fixed-level point selection: `ln|φ̂(k0)| = −0.1`, `ln|φ̂(k1)| = −0.5`.

use super::{estimate_alpha_gamma, finish_two_point, EstimationReport, Method, TwoPoints};
use crate::ecf::CumulantSource;
use crate::error::{Error, Result};
use crate::numerics::{find_root, DEFAULT_ROOT_TOL};
use crate::sample::Sample;

/// Target values of `ln|φ̂|` at `k0` and `k1`.
pub const KRUTTO_LEVELS: (f64, f64) = (-0.1, -0.5);

/// Doublings allowed while scanning for the level crossing.
const MAX_DOUBLINGS: usize = 80;

/// Smallest positive `k` with `ln|φ̂(k)| = level`.
///
/// Starts at `10⁻³ / s` (`s` the sample spread), halves while the level is
/// already passed, then doubles until it is crossed and refines inside the
/// last doubling.
pub fn level_point<S: CumulantSource + ?Sized>(src: &S, level: f64) -> Result<f64> {
    if !(level < 0.0) {
        return Err(Error::LevelUnreachable { level });
    }
    let s = src.scale_hint();
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::LevelUnreachable { level });
    }
    let h = |k: f64| src.log_abs(k) - level;
    let mut lo = 1e-3 / s;
    let mut halvings = 0;
    while h(lo) <= 0.0 {
        halvings += 1;
        if halvings > MAX_DOUBLINGS || lo < f64::MIN_POSITIVE {
            return Err(Error::LevelUnreachable { level });
        }
        lo *= 0.5;
    }
    for _ in 0..MAX_DOUBLINGS {
        let hi = 2.0 * lo;
        let h_hi = h(hi);
        if h_hi <= 0.0 {
            if h_hi == 0.0 {
                return Ok(hi);
            }
            return find_root(h, lo, hi, DEFAULT_ROOT_TOL * lo).map(|r| r.root).map_err(|_| Error::LevelUnreachable { level });
        }
        lo = hi;
    }
    Err(Error::LevelUnreachable { level })
}

pub fn fit_krutto(x: &Sample) -> Result<EstimationReport> {
    fit_krutto_source(x)
}

pub fn fit_krutto_source<S: CumulantSource + ?Sized>(src: &S) -> Result<EstimationReport> {
    let k0 = level_point(src, KRUTTO_LEVELS.0)?;
    let k1 = level_point(src, KRUTTO_LEVELS.1)?;
    let pts = TwoPoints::new(k0, k1)?;
    let (alpha, gamma) = estimate_alpha_gamma(src, pts)?;
    finish_two_point(src, Method::Krutto, pts, alpha, gamma, gamma.powf(alpha), gamma, src.sample_len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::StableParams;

    #[test]
    fn cauchy_levels_are_linear() {
        let p = StableParams::new(1.0, 0.4, 1.0, 2.0).unwrap();
        assert!((level_point(&p, -0.1).unwrap() - 0.1).abs() < 1e-10);
        assert!((level_point(&p, -0.5).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn levels_invert_power_law() {
        let p = StableParams::new(1.5, -0.2, 1.0, 0.0).unwrap();
        assert!((level_point(&p, -0.1).unwrap() - 0.1f64.powf(2.0 / 3.0)).abs() < 1e-10);
        assert!((level_point(&p, -0.5).unwrap() - 0.5f64.powf(2.0 / 3.0)).abs() < 1e-10);
    }

    #[test]
    fn constant_sample_never_reaches_level() {
        let x = Sample::new(vec![1.5; 30]).unwrap();
        assert!(matches!(fit_krutto(&x), Err(Error::LevelUnreachable { .. })));
    }

    #[test]
    fn two_atom_sample_cannot_reach_deep_level() {
        // |cf| of {−1, 1} is |cos k|, whose log reaches every negative level
        let x = Sample::new(vec![-1.0, 1.0]).unwrap();
        let k = level_point(&x, -0.5).unwrap();
        assert!((k.cos().ln() + 0.5).abs() < 1e-9);
        // a sample with a dominant atom keeps |cf| above 0.8
        let mut v = vec![0.0; 9];
        v.push(1.0);
        let x = Sample::new(v).unwrap();
        assert!(matches!(level_point(&x, -0.5), Err(Error::LevelUnreachable { level }) if level == -0.5));
    }
}
