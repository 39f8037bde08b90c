use nalgebra::{DMatrix, DVectorView};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// `n × m` observation matrix, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: DMatrix<f64>,
}

impl Dataset {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::InvalidInput(
                "dataset needs at least one row and one column".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("dataset entries must be finite".into()));
        }
        Ok(Self { values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, m, |r, c| rows[r][c]))
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn m(&self) -> usize {
        self.values.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[(row, col)]
    }

    pub fn column(&self, j: usize) -> DVectorView<'_, f64> {
        self.values.column(j)
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n() as f64;
        (0..self.m()).map(|j| self.values.column(j).sum() / n).collect()
    }

    /// Copy with every column shifted to mean zero.
    pub fn centered(&self) -> Dataset {
        let means = self.column_means();
        let mut values = self.values.clone();
        for (j, mu) in means.iter().enumerate() {
            values.column_mut(j).add_scalar_mut(-mu);
        }
        Dataset { values }
    }

    /// `XᵀX` of the raw (uncentered) data.
    pub fn gram(&self) -> SymMatrix {
        SymMatrix::symmetrized(self.values.tr_mul(&self.values))
    }

    /// Maximum-likelihood covariance `(1/n) (X - x̄)ᵀ(X - x̄)`.
    pub fn sample_covariance(&self) -> SymMatrix {
        let c = self.centered();
        let n = self.n() as f64;
        SymMatrix::symmetrized(c.values.tr_mul(&c.values) / n)
    }

    /// `(1/n) ‖x_j - x̄_j‖²`.
    pub fn column_variance(&self, j: usize) -> f64 {
        let col = self.values.column(j);
        let n = self.n() as f64;
        let mu = col.sum() / n;
        col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_shape_and_values() {
        assert!(Dataset::from_rows(&[]).is_err());
        assert!(Dataset::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(Dataset::from_rows(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn centering_and_covariance() {
        let d = Dataset::from_rows(&[vec![1.0, 2.0], vec![3.0, 6.0]]).unwrap();
        assert_eq!(d.column_means(), vec![2.0, 4.0]);
        let c = d.sample_covariance();
        assert_eq!(c.get(0, 0), 1.0);
        assert_eq!(c.get(0, 1), 2.0);
        assert_eq!(c.get(1, 1), 4.0);
        assert_eq!(d.column_variance(1), 4.0);
        assert_eq!(d.gram().get(0, 1), 20.0);
    }
}
