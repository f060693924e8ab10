use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Min-max scaler fitted on training data only. Values outside the fitted
/// range map outside `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeScaler {
    pub observed_min: f64,
    pub observed_max: f64,
}

impl RangeScaler {
    pub fn fit(train: &[f64]) -> Result<Self> {
        if train.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("scaler input contains non-finite values"));
        }
        let observed_min = train.iter().copied().fold(f64::INFINITY, f64::min);
        let observed_max = train.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(observed_max > observed_min) {
            return Err(Error::invalid("cannot scale a constant (or empty) training series"));
        }
        Ok(Self { observed_min, observed_max })
    }

    pub fn range(&self) -> f64 {
        self.observed_max - self.observed_min
    }

    pub fn transform(&self, x: f64) -> f64 {
        (x - self.observed_min) / self.range()
    }

    pub fn inverse(&self, y: f64) -> f64 {
        self.observed_min + y * self.range()
    }

    pub fn transform_all(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|x| self.transform(*x)).collect()
    }
}

pub fn scaler_fit_transform(train: &[f64]) -> Result<(RangeScaler, Vec<f64>)> {
    let scaler = RangeScaler::fit(train)?;
    let scaled = scaler.transform_all(train);
    Ok((scaler, scaled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic() {
        let (s, v) = scaler_fit_transform(&[0.0, 5.0, 10.0]).unwrap();
        assert_eq!(v, vec![0.0, 0.5, 1.0]);
        assert_eq!(s.transform(12.0), 1.2);
        assert!(scaler_fit_transform(&[3.0, 3.0]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(lo in -1e3f64..1e3, width in 1e-3f64..1e3, x in -1e4f64..1e4) {
            let s = RangeScaler { observed_min: lo, observed_max: lo + width };
            let back = s.inverse(s.transform(x));
            prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(1.0) * (1.0 + lo.abs() / width));
        }
    }
}
