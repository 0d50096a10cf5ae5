use std::io::Read;

use crate::dataset::{csv_error, csv_reader, Dataset, Point};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Euclidean distance between two coordinate slices of equal length.
#[inline]
pub fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .fold(T::zero(), |acc, v| acc + v)
        .sqrt()
}

/// Euclidean distance between two points; fails on mismatched dimensionality.
pub fn distance<T: Scalar>(a: &Point<T>, b: &Point<T>) -> Result<T> {
    if a.coords.len() != b.coords.len() {
        return Err(Error::DimensionMismatch {
            expected: a.coords.len(),
            found: b.coords.len(),
        });
    }
    Ok(euclidean(&a.coords, &b.coords))
}

/// Dense symmetric distance matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Validates and wraps externally supplied rows.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        let m = DistanceMatrix { n, data };
        m.validate()?;
        Ok(m)
    }

    /// Brute-force pairwise Euclidean distances of a dataset.
    pub fn from_dataset(dataset: &Dataset<T>) -> Self {
        let n = dataset.len();
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = euclidean(dataset.coords(i), dataset.coords(j));
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        DistanceMatrix { n, data }
    }

    /// Reads an n×n CSV matrix (no header).
    pub fn load_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv_reader(reader);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_error)?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            if rec.len() == 1 && rec[0].is_empty() {
                continue;
            }
            let row = rec
                .iter()
                .map(|f| {
                    f.parse::<T>().map_err(|_| Error::Parse {
                        line,
                        message: format!("invalid number {f:?}"),
                    })
                })
                .collect::<Result<Vec<T>>>()?;
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.get(i, i) != T::zero() {
                return Err(Error::InvalidMatrix(format!("non-zero diagonal at {i}")));
            }
            for j in 0..n {
                let d = self.get(i, j);
                if !d.is_finite() || d < T::zero() {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({i},{j}) is negative or non-finite"
                    )));
                }
                if d != self.get(j, i) {
                    return Err(Error::InvalidMatrix(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Where pairwise distances come from: coordinates on demand, or a supplied matrix.
#[derive(Debug, Clone, Copy)]
pub enum DistanceSource<'a, T> {
    Metric(&'a Dataset<T>),
    Matrix(&'a DistanceMatrix<T>),
}

impl<'a, T: Scalar> DistanceSource<'a, T> {
    pub fn len(&self) -> usize {
        match self {
            DistanceSource::Metric(ds) => ds.len(),
            DistanceSource::Matrix(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> T {
        match self {
            DistanceSource::Metric(ds) => euclidean(ds.coords(i), ds.coords(j)),
            DistanceSource::Matrix(m) => m.get(i, j),
        }
    }

    pub fn dataset(&self) -> Option<&'a Dataset<T>> {
        match self {
            DistanceSource::Metric(ds) => Some(ds),
            DistanceSource::Matrix(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pt(coords: Vec<f64>) -> Point<f64> {
        Point {
            id: 0,
            coords,
            truth: None,
        }
    }

    #[test]
    fn known_distances() {
        assert_eq!(distance(&pt(vec![0.0, 0.0]), &pt(vec![3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(distance(&pt(vec![1.0, 1.0]), &pt(vec![1.0, 1.0])).unwrap(), 0.0);
        assert_relative_eq!(
            distance(&pt(vec![0.0, 0.0]), &pt(vec![1.0, 1.0])).unwrap(),
            std::f64::consts::SQRT_2
        );
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = distance(&pt(vec![0.0]), &pt(vec![0.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn matrix_validation() {
        assert!(DistanceMatrix::from_rows(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(vec![vec![0.0, 1.0]]).is_err());
        let m = DistanceMatrix::from_rows(vec![vec![0.0, 1.5], vec![1.5, 0.0]]).unwrap();
        assert_eq!(m.get(1, 0), 1.5);
    }

    #[test]
    fn matrix_csv() {
        let m: DistanceMatrix<f64> = DistanceMatrix::load_csv("0,2\n2,0\n".as_bytes()).unwrap();
        assert_eq!(m.len(), 2);
        assert!(DistanceMatrix::<f64>::load_csv("0,2\n3,0\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn metric_is_symmetric_with_zero_self_distance(
            a in prop::collection::vec(-1e3f64..1e3, 3),
            b in prop::collection::vec(-1e3f64..1e3, 3),
        ) {
            prop_assert_eq!(euclidean(&a, &b), euclidean(&b, &a));
            prop_assert_eq!(euclidean(&a, &a), 0.0);
            prop_assert!(euclidean(&a, &b) >= 0.0);
        }
    }
}
