use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Minimum number of observations needed for estimation.
pub const MIN_T: usize = 3;

/// An N-series by T-period real panel. Rows are series, columns are time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesPanel {
    values: DMatrix<f64>,
    series_names: Vec<String>,
}

impl TimeSeriesPanel {
    /// Build a panel with default names `s1..sN`.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        let names = (1..=values.nrows()).map(|i| format!("s{i}")).collect();
        Self::with_names(values, names)
    }

    pub fn with_names(values: DMatrix<f64>, series_names: Vec<String>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::EmptyPanel);
        }
        if series_names.len() != values.nrows() {
            return Err(Error::NameMismatch {
                names: series_names.len(),
                series: values.nrows(),
            });
        }
        check_finite(&values)?;
        Ok(Self {
            values,
            series_names,
        })
    }

    /// Build from row-major series: `rows[i]` is series i over time.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let t = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != t) {
            return Err(Error::InvalidConfig("series of unequal length".into()));
        }
        Self::new(DMatrix::from_fn(n, t, |i, j| rows[i][j]))
    }

    pub fn n_series(&self) -> usize {
        self.values.nrows()
    }

    pub fn t_len(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn series_names(&self) -> &[String] {
        &self.series_names
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    /// Same names, new values. The shape must match.
    pub(crate) fn with_values(&self, values: DMatrix<f64>) -> Result<Self> {
        debug_assert_eq!(values.shape(), self.values.shape());
        Self::with_names(values, self.series_names.clone())
    }

    /// First differences, an N×(T−1) matrix.
    pub fn differences(&self) -> DMatrix<f64> {
        let t = self.t_len();
        DMatrix::from_fn(self.n_series(), t.saturating_sub(1), |i, s| {
            self.values[(i, s + 1)] - self.values[(i, s)]
        })
    }

    /// Fail with `TooShort` unless the panel has at least [`MIN_T`] periods.
    pub fn require_estimable(&self) -> Result<()> {
        if self.t_len() < MIN_T {
            return Err(Error::TooShort {
                min: MIN_T,
                got: self.t_len(),
            });
        }
        Ok(())
    }
}

fn check_finite(values: &DMatrix<f64>) -> Result<()> {
    for t in 0..values.ncols() {
        for i in 0..values.nrows() {
            if !values[(i, t)].is_finite() {
                return Err(Error::NonFinite {
                    series: i,
                    t: t + 1,
                });
            }
        }
    }
    Ok(())
}
