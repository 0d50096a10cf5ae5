//! Points, datasets and the CSV point format.
//!
//! A dataset file is comma separated with an optional single header line.
//! Coordinates fill the leading columns; when the header names its last
//! column `label`, that column is read as an integer ground-truth class
//! (an empty field means "unlabeled").

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Point<T> {
    pub id: usize,
    pub coords: Vec<T>,
    pub truth: Option<i64>,
}

/// Ordered collection of points sharing one dimensionality.
///
/// Point ids always equal their position, so they form `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    points: Vec<Point<T>>,
    dim: usize,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset from coordinate rows and optional per-row labels.
    pub fn from_rows(rows: Vec<Vec<T>>, labels: Option<Vec<Option<i64>>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(labels) = &labels {
            if labels.len() != rows.len() {
                return Err(Error::Format(format!(
                    "{} labels for {} rows",
                    labels.len(),
                    rows.len()
                )));
            }
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::Format("points need at least one coordinate".into()));
        }
        let mut labels = labels.map(|l| l.into_iter());
        let mut points = Vec::with_capacity(rows.len());
        for (id, coords) in rows.into_iter().enumerate() {
            if coords.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: coords.len(),
                });
            }
            if coords.iter().any(|c| !c.is_finite()) {
                return Err(Error::Format(format!("point {id} has a non-finite coordinate")));
            }
            let truth = labels.as_mut().and_then(|l| l.next().flatten());
            points.push(Point { id, coords, truth });
        }
        Ok(Dataset { points, dim })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn point(&self, id: usize) -> &Point<T> {
        &self.points[id]
    }

    pub fn coords(&self, id: usize) -> &[T] {
        &self.points[id].coords
    }

    pub fn truth_labels(&self) -> Vec<Option<i64>> {
        self.points.iter().map(|p| p.truth).collect()
    }

    pub fn has_labels(&self) -> bool {
        self.points.iter().any(|p| p.truth.is_some())
    }

    /// Ids of points that carry a ground-truth label.
    pub fn labeled_ids(&self) -> Vec<usize> {
        self.points
            .iter()
            .filter(|p| p.truth.is_some())
            .map(|p| p.id)
            .collect()
    }

    /// Per-dimension `(min, max)` over all points.
    pub fn bounds(&self) -> Vec<(T, T)> {
        (0..self.dim)
            .map(|d| {
                self.points.iter().fold(
                    (T::infinity(), T::neg_infinity()),
                    |(lo, hi), p| (lo.min(p.coords[d]), hi.max(p.coords[d])),
                )
            })
            .collect()
    }

    /// Appends points (ids continue from the current length).
    pub fn extend<I>(&mut self, extra: I) -> Result<()>
    where
        I: IntoIterator<Item = (Vec<T>, Option<i64>)>,
    {
        for (coords, truth) in extra {
            if coords.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: coords.len(),
                });
            }
            let id = self.points.len();
            self.points.push(Point { id, coords, truth });
        }
        Ok(())
    }

    /// Keeps only the points selected by `keep`, renumbering ids.
    pub fn retain(&self, mut keep: impl FnMut(&Point<T>) -> bool) -> Result<Self> {
        let (rows, labels): (Vec<_>, Vec<_>) = self
            .points
            .iter()
            .filter(|p| keep(p))
            .map(|p| (p.coords.clone(), p.truth))
            .unzip();
        Dataset::from_rows(rows, Some(labels))
    }

    /// Reorders points so that new id `i` is old id `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::param("permutation length differs from dataset size"));
        }
        let rows = order.iter().map(|&i| self.points[i].coords.clone()).collect();
        let labels = order.iter().map(|&i| self.points[i].truth).collect();
        Dataset::from_rows(rows, Some(labels))
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| Point {
                id: p.id,
                coords: p.coords.iter().map(|&c| c * factor).collect(),
                truth: p.truth,
            })
            .collect();
        Dataset {
            points,
            dim: self.dim,
        }
    }
}

pub(crate) fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader)
}

pub(crate) fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    match err.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

fn looks_numeric(rec: &csv::StringRecord) -> bool {
    rec.iter().all(|f| f.is_empty() || f.parse::<f64>().is_ok())
}

/// Reads a dataset from CSV text.
pub fn load_csv<T: Scalar, R: Read>(reader: R) -> Result<Dataset<T>> {
    let mut rdr = csv_reader(reader);
    let mut records = rdr.records();
    let mut rows: Vec<Vec<T>> = Vec::new();
    let mut labels: Vec<Option<i64>> = Vec::new();
    let mut has_label = false;
    let mut width: Option<usize> = None;
    let mut first = true;

    for rec in records.by_ref() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if first {
            first = false;
            if !looks_numeric(&rec) {
                has_label = rec
                    .iter()
                    .last()
                    .is_some_and(|h| h.eq_ignore_ascii_case("label"));
                width = Some(rec.len());
                continue;
            }
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(Error::Format(format!(
                "line {line}: expected {w} columns, found {}",
                rec.len()
            )));
        }
        let n_coords = if has_label { w - 1 } else { w };
        if n_coords == 0 {
            return Err(Error::Format("no coordinate columns".into()));
        }
        let mut coords = Vec::with_capacity(n_coords);
        for field in rec.iter().take(n_coords) {
            let v: T = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid number {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite coordinate {field:?}"),
                });
            }
            coords.push(v);
        }
        let label = if has_label {
            let field = &rec[w - 1];
            if field.is_empty() {
                None
            } else {
                Some(field.parse::<i64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid label {field:?}"),
                })?)
            }
        } else {
            None
        };
        rows.push(coords);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::from_rows(rows, Some(labels))
}

fn axis_name(dim: usize, d: usize) -> String {
    if dim <= 3 {
        ["x", "y", "z"][d].to_string()
    } else {
        format!("x{}", d + 1)
    }
}

/// Writes the dataset with a header; the `label` column is emitted when any
/// point is labeled (unlabeled points get an empty field).
pub fn write_csv<T: Scalar, W: Write>(dataset: &Dataset<T>, mut out: W) -> Result<()> {
    let labeled = dataset.has_labels();
    let mut header: Vec<String> = (0..dataset.dim()).map(|d| axis_name(dataset.dim(), d)).collect();
    if labeled {
        header.push("label".into());
    }
    writeln!(out, "{}", header.join(","))?;
    for p in dataset.points() {
        let mut fields: Vec<String> = p.coords.iter().map(|c| c.to_string()).collect();
        if labeled {
            fields.push(p.truth.map(|l| l.to_string()).unwrap_or_default());
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}
