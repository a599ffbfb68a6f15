//! The aligned `(W, Y, Z)` observation matrix that all estimators consume.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Time-aligned observations of the conditioning vector `W`, the response
/// `Y`, and the candidate predictor `Z`. Row `t` holds the t-th triple.
///
/// Construction validates that the three blocks have the same number of
/// rows and that every entry is finite. Estimators additionally require at
/// least two rows; a one-row sample can exist transiently (for example as
/// the output of an extreme lag embedding) but cannot be tested.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesSample {
    w: Array2<f64>,
    y: Array2<f64>,
    z: Array2<f64>,
}

fn check_finite(name: &str, m: &Array2<f64>) -> Result<()> {
    for ((r, c), &v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { what: name.to_string(), row: r, col: c });
        }
    }
    Ok(())
}

impl TimeSeriesSample {
    pub fn new(w: Array2<f64>, y: Array2<f64>, z: Array2<f64>) -> Result<Self> {
        let n = w.nrows();
        if y.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: y.nrows() });
        }
        if z.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: z.nrows() });
        }
        if n == 0 {
            return Err(Error::SampleTooShort { needed: 1, actual: 0 });
        }
        if w.ncols() == 0 || y.ncols() == 0 || z.ncols() == 0 {
            return Err(Error::InvalidConfig("every block needs at least one column".into()));
        }
        check_finite("W", &w)?;
        check_finite("Y", &y)?;
        check_finite("Z", &z)?;
        Ok(Self { w, y, z })
    }

    /// Build from univariate series; the common case in the simulations.
    pub fn from_univariate(w: &[f64], y: &[f64], z: &[f64]) -> Result<Self> {
        let col = |v: &[f64]| Array2::from_shape_vec((v.len(), 1), v.to_vec()).expect("column");
        Self::new(col(w), col(y), col(z))
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn d_w(&self) -> usize {
        self.w.ncols()
    }

    pub fn d_y(&self) -> usize {
        self.y.ncols()
    }

    pub fn d_z(&self) -> usize {
        self.z.ncols()
    }

    pub fn w(&self) -> ArrayView2<'_, f64> {
        self.w.view()
    }

    pub fn y(&self) -> ArrayView2<'_, f64> {
        self.y.view()
    }

    pub fn z(&self) -> ArrayView2<'_, f64> {
        self.z.view()
    }

    /// Estimators need at least `needed` rows.
    pub fn require_rows(&self, needed: usize) -> Result<()> {
        if self.n() < needed {
            return Err(Error::SampleTooShort { needed, actual: self.n() });
        }
        Ok(())
    }
}

/// Componentwise weak inequality `a <= b`; the indicator convention used
/// throughout (ties included).
pub(crate) fn all_leq(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_row_mismatch() {
        let w = array![[0.0], [1.0]];
        let y = array![[0.0], [1.0], [2.0]];
        let z = array![[0.0], [1.0]];
        assert!(matches!(
            TimeSeriesSample::new(w, y, z),
            Err(Error::DimensionMismatch { expected: 2, actual: 3 })
        ));
    }

    #[test]
    fn rejects_non_finite() {
        let w = array![[0.0], [f64::NAN]];
        let y = array![[0.0], [1.0]];
        let z = array![[0.0], [1.0]];
        let err = TimeSeriesSample::new(w, y, z).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 1, col: 0, .. }));
    }

    #[test]
    fn dims_are_reported() {
        let s = TimeSeriesSample::new(
            array![[0.0, 1.0], [1.0, 2.0]],
            array![[0.0], [1.0]],
            array![[0.0], [1.0]],
        )
        .unwrap();
        assert_eq!((s.n(), s.d_w(), s.d_y(), s.d_z()), (2, 2, 1, 1));
    }

    #[test]
    fn leq_is_componentwise_and_weak() {
        assert!(all_leq(&[1.0, 2.0], &[1.0, 2.0]));
        assert!(all_leq(&[0.0, -1.0], &[1.0, 0.0]));
        assert!(!all_leq(&[0.0, 3.0], &[1.0, 2.0]));
    }
}
