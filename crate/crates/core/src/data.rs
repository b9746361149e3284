//! Labeled point sets and their CSV form.
//!
//! The CSV layout is `d` feature columns followed by one integer label column,
//! with a mandatory header row.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    points: Array2<f64>,
    labels: Vec<usize>,
    class_count: usize,
}

impl LabeledDataset {
    pub fn new(points: Array2<f64>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if points.nrows() == 0 {
            return Err(Error::InvalidArgument("dataset must contain at least one point".into()));
        }
        if points.ncols() == 0 {
            return Err(Error::InvalidArgument("points must have dimension ≥ 1".into()));
        }
        if labels.len() != points.nrows() {
            return Err(Error::DimensionMismatch { expected: points.nrows(), got: labels.len() });
        }
        if class_count < 2 {
            return Err(Error::InvalidArgument(format!("class_count must be ≥ 2, got {class_count}")));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range for {class_count} classes"
            )));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("points contain non-finite values".into()));
        }
        Ok(Self { points, labels, class_count })
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Smallest Euclidean norm over all points (the radius `r` of the
    /// two-layer bounds).
    pub fn min_norm(&self) -> f64 {
        self.points
            .rows()
            .into_iter()
            .map(|row| row.dot(&row).sqrt())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_binary(&self) -> bool {
        self.labels.iter().all(|&l| l <= 1)
    }

    /// Targets in {−1, +1} for the quadratic loss: label 1 → +1, label 0 → −1.
    pub fn signed_targets(&self) -> Result<Vec<f64>> {
        self.labels
            .iter()
            .map(|&l| match l {
                0 => Ok(-1.0),
                1 => Ok(1.0),
                label => Err(Error::NotBinary { label }),
            })
            .collect()
    }

    /// Number of pairwise distinct point values.
    pub fn distinct_point_count(&self) -> usize {
        let mut rows: Vec<Vec<u64>> = self
            .points
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|v| canonical_bits(*v)).collect())
            .collect();
        rows.sort_unstable();
        rows.dedup();
        rows.len()
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let d = self.dim();
        let mut points = Array2::zeros((indices.len(), d));
        let mut labels = Vec::with_capacity(indices.len());
        for (row, &i) in indices.iter().enumerate() {
            points.row_mut(row).assign(&self.points.row(i));
            labels.push(self.labels[i]);
        }
        Self::new(points, labels, self.class_count)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let width = rdr.headers()?.len();
        if width < 2 {
            return Err(Error::Parse(
                "dataset CSV needs at least one feature column and a label column".into(),
            ));
        }
        let d = width - 1;
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != width {
                return Err(Error::Parse(format!(
                    "row {}: expected {width} columns, found {}",
                    line + 1,
                    record.len()
                )));
            }
            for field in record.iter().take(d) {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Parse(format!("row {}: bad feature value `{field}`", line + 1))
                })?;
                values.push(v);
            }
            let raw = record[d].trim();
            let label: usize = raw
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad label `{raw}`", line + 1)))?;
            labels.push(label);
        }
        if labels.is_empty() {
            return Err(Error::Parse("dataset CSV has no rows".into()));
        }
        let class_count = labels.iter().copied().max().unwrap_or(0).max(1) + 1;
        let points = Array2::from_shape_vec((labels.len(), d), values)
            .map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(points, labels, class_count)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.dim()).map(|j| format!("x{j}")).collect();
        header.push("label".into());
        wtr.write_record(&header)?;
        for (row, label) in self.points.rows().into_iter().zip(&self.labels) {
            let mut fields: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            fields.push(label.to_string());
            wtr.write_record(&fields)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Bit pattern with −0.0 folded onto 0.0 so equal values compare equal.
pub(crate) fn canonical_bits(v: f64) -> u64 {
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}
