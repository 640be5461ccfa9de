//! Observed multivariate spatial data: locations plus a value matrix.

use crate::error::{Error, Result};
use crate::geometry::Coords;
use nalgebra::DMatrix;

/// An n-point, p-variate spatial sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialData {
    coords: Coords,
    values: DMatrix<f64>,
}

impl SpatialData {
    /// Couples locations with a value matrix; one row of values per point,
    /// all entries finite.
    pub fn new(coords: Coords, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != coords.len() {
            return Err(Error::DimensionMismatch {
                what: "spatial data rows vs coordinates".into(),
                expected: coords.len(),
                got: values.nrows(),
            });
        }
        if values.ncols() == 0 {
            return Err(Error::DimensionMismatch {
                what: "spatial data columns".into(),
                expected: 1,
                got: 0,
            });
        }
        if let Some((i, j)) = (0..values.nrows())
            .flat_map(|i| (0..values.ncols()).map(move |j| (i, j)))
            .find(|&(i, j)| !values[(i, j)].is_finite())
        {
            return Err(Error::CsvFormat {
                row: i,
                col: j,
                reason: format!("non-finite value {}", values[(i, j)]),
            });
        }
        Ok(Self { coords, values })
    }

    /// Number of points.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Number of variables.
    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Re-wraps this sample with transformed values on the same locations.
    pub fn with_values(&self, values: DMatrix<f64>) -> Result<Self> {
        Self::new(self.coords.clone(), values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Coords;

    #[test]
    fn row_count_must_match_coords() {
        let coords = Coords::new(vec![[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let bad = SpatialData::new(coords.clone(), DMatrix::zeros(3, 2));
        assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
        let ok = SpatialData::new(coords, DMatrix::zeros(2, 2)).unwrap();
        assert_eq!((ok.n(), ok.p()), (2, 2));
    }

    #[test]
    fn non_finite_values_are_rejected_with_position() {
        let coords = Coords::new(vec![[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let mut v = DMatrix::zeros(2, 2);
        v[(1, 0)] = f64::NAN;
        match SpatialData::new(coords, v) {
            Err(Error::CsvFormat { row: 1, col: 0, .. }) => {}
            other => panic!("expected position-reporting error, got {other:?}"),
        }
    }
}
