use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-dimension min-max scaler fitted on training rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Scaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::InvalidArgument("cannot fit scaler on no rows".into()))?;
        let dim = first.len();
        let mut min = vec![f64::INFINITY; dim];
        let mut max = vec![f64::NEG_INFINITY; dim];
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
            }
            for ((lo, hi), &v) in min.iter_mut().zip(max.iter_mut()).zip(row) {
                if !v.is_finite() {
                    return Err(Error::NonFinite("scaler input"));
                }
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
        }
        Ok(Scaler { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Maps training range to `[0, 1]`; constant dimensions map to 0. No clamping.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect())
    }

    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_and_constant_dims() {
        let s = Scaler::fit(&[vec![2.0, 5.0], vec![4.0, 5.0], vec![3.0, 5.0]]).unwrap();
        assert_eq!(s.apply(&[2.0, 5.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(s.apply(&[4.0, 5.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(s.apply(&[6.0, 9.0]).unwrap(), vec![2.0, 0.0]);
    }

    #[test]
    fn errors() {
        assert!(Scaler::fit(&[]).is_err());
        assert!(Scaler::fit(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(Scaler::fit(&[vec![f64::NAN]]).is_err());
        let s = Scaler::fit(&[vec![1.0]]).unwrap();
        assert!(s.apply(&[1.0, 2.0]).is_err());
    }
}
