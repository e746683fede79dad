//! Unit-frequency variant: `k1 = 1`, `ĉ = −ln|φ̂(1)|` stands in for `γ^α`, and
//! `k0` maximizes the gap between the Gaussian and Cauchy absolute CFs at
//! scale `ĉ`.

use super::{estimate_alpha_gamma, finish_two_point, EstimationReport, Method, TwoPoints};
use crate::ecf::CumulantSource;
use crate::error::{Error, Result};
use crate::numerics::{maximize_scalar, DEFAULT_ROOT_TOL};
use crate::sample::Sample;

/// `argmax_{k ∈ (0,1)} |e^{−ck²} − e^{−ck}|`.
pub fn bibalan_first_point(c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::DegenerateScale { c });
    }
    let gap = |k: f64| ((-c * k * k).exp() - (-c * k).exp()).abs();
    Ok(maximize_scalar(gap, 0.0, 1.0, DEFAULT_ROOT_TOL)?.argmax)
}

pub fn fit_bibalan(x: &Sample) -> Result<EstimationReport> {
    fit_bibalan_source(x)
}

pub fn fit_bibalan_source<S: CumulantSource + ?Sized>(src: &S) -> Result<EstimationReport> {
    let c = -src.log_abs(1.0);
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::DegenerateScale { c });
    }
    let k0 = bibalan_first_point(c)?;
    let pts = TwoPoints::new(k0, 1.0)?;
    let (alpha, _) = estimate_alpha_gamma(src, pts)?;
    let gamma = (c.ln() / alpha).exp();
    finish_two_point(src, Method::Bibalan, pts, alpha, gamma, c, c, src.sample_len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::StableParams;

    #[test]
    fn unit_scale_gives_unit_c() {
        let p = StableParams::new(1.3, 0.5, 1.0, -1.0).unwrap();
        assert!((-p.log_abs(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn first_point_matches_grid_scan() {
        for &c in &[0.2, 1.0, 3.0, 50.0] {
            let k = bibalan_first_point(c).unwrap();
            let gap = |k: f64| (-c * k * k).exp() - (-c * k).exp();
            let (mut best, mut best_k) = (f64::MIN, 0.0);
            for i in 1..1_000_000 {
                let kk = i as f64 * 1e-6;
                if gap(kk) > best {
                    best = gap(kk);
                    best_k = kk;
                }
            }
            assert!((k - best_k).abs() < 2e-6, "c = {c}: {k} vs {best_k}");
        }
    }

    #[test]
    fn constant_sample_has_no_scale() {
        let x = Sample::new(vec![0.0; 25]).unwrap();
        let err = fit_bibalan(&x).unwrap_err();
        assert!(matches!(err, Error::DegenerateScale { .. }));
        assert!(err.to_string().contains("100"));
    }
}
