use crate::error::{Error, Result};

/// An immutable batch of finite observations with a cached sort order.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    sorted: Vec<f64>,
}

impl Sample {
    pub const MIN_LEN: usize = 2;

    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < Self::MIN_LEN {
            return Err(Error::InsufficientSample {
                n: values.len(),
                required: Self::MIN_LEN,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSample(format!("value at index {i} is not finite")));
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Sample { values, sorted })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_constant(&self) -> bool {
        self.sorted[0] == self.sorted[self.sorted.len() - 1]
    }

    /// `scale · x + shift` elementwise.
    pub fn map_affine(&self, scale: f64, shift: f64) -> Sample {
        let values: Vec<f64> = self.values.iter().map(|v| scale * v + shift).collect();
        let mut sorted: Vec<f64> = self.sorted.iter().map(|v| scale * v + shift).collect();
        if scale < 0.0 {
            sorted.reverse();
        }
        Sample { values, sorted }
    }

    /// Linear interpolation between order statistics (R type 7).
    pub fn quantile(&self, p: f64) -> f64 {
        let xs = &self.sorted;
        let h = (xs.len() - 1) as f64 * p.clamp(0.0, 1.0);
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(xs.len() - 1);
        let frac = h - lo as f64;
        xs[lo] + frac * (xs[hi] - xs[lo])
    }

    pub fn iqr(&self) -> f64 {
        self.quantile(0.75) - self.quantile(0.25)
    }

    /// A positive spread measure: the IQR, or the range when the IQR vanishes.
    /// Zero only for a constant sample.
    pub fn spread(&self) -> f64 {
        let iqr = self.iqr();
        if iqr > 0.0 {
            iqr
        } else {
            self.sorted[self.sorted.len() - 1] - self.sorted[0]
        }
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Sample::new(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_non_finite() {
        assert!(matches!(Sample::new(vec![1.0]), Err(Error::InsufficientSample { n: 1, .. })));
        assert!(matches!(Sample::new(vec![1.0, f64::NAN]), Err(Error::InvalidSample(_))));
    }

    #[test]
    fn type7_quantiles() {
        let x = Sample::new((1..=100).map(f64::from).collect()).unwrap();
        assert_eq!(x.quantile(0.5), 50.5);
        assert_eq!(x.quantile(0.0), 1.0);
        assert_eq!(x.quantile(1.0), 100.0);
        assert!((x.quantile(0.25) - 25.75).abs() < 1e-12);
    }

    #[test]
    fn negative_scale_keeps_sorted_order() {
        let x = Sample::new(vec![3.0, -1.0, 2.0]).unwrap();
        let y = x.map_affine(-2.0, 1.0);
        assert_eq!(y.values(), &[-5.0, 3.0, -3.0]);
        assert_eq!(y.sorted(), &[-5.0, -3.0, 3.0]);
    }

    #[test]
    fn spread_falls_back_to_range() {
        let x = Sample::new(vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 5.0]).unwrap();
        assert_eq!(x.iqr(), 0.0);
        assert_eq!(x.spread(), 5.0);
        assert!(Sample::new(vec![2.0, 2.0]).unwrap().is_constant());
    }
}
