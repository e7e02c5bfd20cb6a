//! Revealed comparative advantage, binarization into the incidence matrix
//! `M_cp`, and pruning of empty rows and columns.

use ndarray::Array2;
use serde::Serialize;
use thiserror::Error;

use crate::ingest::OutputMatrix;
use crate::table::format_matrix;
use crate::{Scalar, Side};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IncidenceError {
    #[error("{side} {label:?} has zero total output; filter the matrix first")]
    ZeroMargin { side: Side, label: String },
    #[error("output matrix is empty")]
    EmptyMatrix,
    #[error("binarization threshold must be positive and finite, got {0}")]
    InvalidThreshold(f64),
    #[error("no location or activity survives pruning")]
    EmptyAfterPrune,
    #[error("invalid incidence matrix: {0}")]
    InvalidMatrix(String),
}

/// `R_cp = X_cp X / (X_c X_p)`, with the labels of its source matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecializationMatrix<T> {
    pub values: Array2<T>,
    pub location_labels: Vec<String>,
    pub activity_labels: Vec<String>,
}

impl<T: Scalar> SpecializationMatrix<T> {
    pub fn to_delimited(&self, delimiter: char) -> String {
        format_matrix(delimiter, "location", &self.location_labels, &self.activity_labels, |i, j| {
            self.values[[i, j]]
        })
    }
}

/// Revealed comparative advantage of every cell.
pub fn compute_rca<T: Scalar>(m: &OutputMatrix<T>) -> Result<SpecializationMatrix<T>, IncidenceError> {
    if m.is_empty() {
        return Err(IncidenceError::EmptyMatrix);
    }
    if let Some(c) = m.row_totals().iter().position(|&t| t <= T::zero()) {
        return Err(IncidenceError::ZeroMargin {
            side: Side::Location,
            label: m.location_labels()[c].clone(),
        });
    }
    if let Some(p) = m.col_totals().iter().position(|&t| t <= T::zero()) {
        return Err(IncidenceError::ZeroMargin {
            side: Side::Activity,
            label: m.activity_labels()[p].clone(),
        });
    }
    let total = m.grand_total();
    let (xc, xp) = (m.row_totals(), m.col_totals());
    let values = Array2::from_shape_fn(m.values().dim(), |(c, p)| {
        let x = m.values()[[c, p]];
        if x == T::zero() {
            T::zero()
        } else {
            x * total / (xc[c] * xp[p])
        }
    });
    Ok(SpecializationMatrix {
        values,
        location_labels: m.location_labels().to_vec(),
        activity_labels: m.activity_labels().to_vec(),
    })
}

/// Binary location x activity matrix with exact integer margins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    values: Array2<u8>,
    location_labels: Vec<String>,
    activity_labels: Vec<String>,
    diversity: Vec<usize>,
    ubiquity: Vec<usize>,
}

impl IncidenceMatrix {
    pub fn new(
        location_labels: Vec<String>,
        activity_labels: Vec<String>,
        values: Array2<u8>,
    ) -> Result<Self, IncidenceError> {
        if values.dim() != (location_labels.len(), activity_labels.len()) {
            return Err(IncidenceError::InvalidMatrix(format!(
                "shape {:?} does not match {} x {} labels",
                values.dim(),
                location_labels.len(),
                activity_labels.len()
            )));
        }
        if values.iter().any(|&v| v > 1) {
            return Err(IncidenceError::InvalidMatrix("entries must be 0 or 1".into()));
        }
        for labels in [&location_labels, &activity_labels] {
            let mut sorted: Vec<&String> = labels.iter().collect();
            sorted.sort();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(IncidenceError::InvalidMatrix("duplicate labels".into()));
            }
        }
        Ok(Self::from_parts(location_labels, activity_labels, values))
    }

    /// Labels `c0, c1, ...` and `p0, p1, ...`, zero-padded so that label order
    /// and index order agree.
    pub fn unlabeled(values: Array2<u8>) -> Result<Self, IncidenceError> {
        let (rows, cols) = values.dim();
        Self::new(padded_labels("c", rows), padded_labels("p", cols), values)
    }

    pub(crate) fn from_parts(location_labels: Vec<String>, activity_labels: Vec<String>, values: Array2<u8>) -> Self {
        let count = |lane: ndarray::ArrayView1<u8>| lane.iter().map(|&v| v as usize).sum();
        let diversity = values.rows().into_iter().map(count).collect();
        let ubiquity = values.columns().into_iter().map(count).collect();
        Self {
            values,
            location_labels,
            activity_labels,
            diversity,
            ubiquity,
        }
    }

    pub fn values(&self) -> &Array2<u8> {
        &self.values
    }

    pub fn location_labels(&self) -> &[String] {
        &self.location_labels
    }

    pub fn activity_labels(&self) -> &[String] {
        &self.activity_labels
    }

    pub fn labels(&self, side: Side) -> &[String] {
        match side {
            Side::Location => &self.location_labels,
            Side::Activity => &self.activity_labels,
        }
    }

    /// `M_c`: number of activities each location holds.
    pub fn diversity(&self) -> &[usize] {
        &self.diversity
    }

    /// `M_p`: number of locations holding each activity.
    pub fn ubiquity(&self) -> &[usize] {
        &self.ubiquity
    }

    /// Row or column sums depending on the side.
    pub fn degrees(&self, side: Side) -> &[usize] {
        match side {
            Side::Location => &self.diversity,
            Side::Activity => &self.ubiquity,
        }
    }

    pub fn num_locations(&self) -> usize {
        self.location_labels.len()
    }

    pub fn num_activities(&self) -> usize {
        self.activity_labels.len()
    }

    pub fn has_positive_margins(&self) -> bool {
        self.diversity.iter().all(|&d| d > 0) && self.ubiquity.iter().all(|&u| u > 0)
    }

    /// Matrix as scalars, transposed when `side` is the activity side so that
    /// rows always index the side of interest.
    pub fn oriented<T: Scalar>(&self, side: Side) -> Array2<T> {
        let m = self.values.mapv(|v| if v == 1 { T::one() } else { T::zero() });
        match side {
            Side::Location => m,
            Side::Activity => m.reversed_axes(),
        }
    }

    /// Submatrix on the given indices, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let values = Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| self.values[[rows[i], cols[j]]]);
        Self::from_parts(
            rows.iter().map(|&i| self.location_labels[i].clone()).collect(),
            cols.iter().map(|&j| self.activity_labels[j].clone()).collect(),
            values,
        )
    }

    pub fn to_delimited(&self, delimiter: char) -> String {
        format_matrix(delimiter, "location", &self.location_labels, &self.activity_labels, |i, j| {
            self.values[[i, j]]
        })
    }
}

pub(crate) fn padded_labels(prefix: &str, n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

/// `M_c` of a matrix.
pub fn diversity(m: &IncidenceMatrix) -> Vec<usize> {
    m.diversity().to_vec()
}

/// `M_p` of a matrix.
pub fn ubiquity(m: &IncidenceMatrix) -> Vec<usize> {
    m.ubiquity().to_vec()
}

/// `M_cp = 1` iff `R_cp >= threshold` (inclusive, exact comparison).
pub fn binarize<T: Scalar>(r: &SpecializationMatrix<T>, threshold: T) -> Result<IncidenceMatrix, IncidenceError> {
    if !(threshold > T::zero()) || !threshold.is_finite() {
        return Err(IncidenceError::InvalidThreshold(threshold.as_f64()));
    }
    let values = r.values.mapv(|v| u8::from(v >= threshold));
    Ok(IncidenceMatrix::from_parts(
        r.location_labels.clone(),
        r.activity_labels.clone(),
        values,
    ))
}

/// A label removed while cleaning a matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RemovedLabel {
    pub label: String,
    pub side: Side,
    pub pass: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PruneReport {
    pub removed: Vec<RemovedLabel>,
}

impl PruneReport {
    pub fn is_empty(&self) -> bool {
        self.removed.is_empty()
    }
}

/// Removes locations with zero diversity and activities with zero ubiquity,
/// recomputing margins after each pass, until none is left.
pub fn prune_degenerate(m: &IncidenceMatrix) -> Result<(IncidenceMatrix, PruneReport), IncidenceError> {
    let mut rows: Vec<usize> = (0..m.num_locations()).collect();
    let mut cols: Vec<usize> = (0..m.num_activities()).collect();
    let mut report = PruneReport::default();
    let mut pass = 0;
    loop {
        pass += 1;
        let (kept_rows, dropped_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| cols.iter().any(|&j| m.values[[i, j]] == 1));
        let (kept_cols, dropped_cols): (Vec<usize>, Vec<usize>) =
            cols.iter().partition(|&&j| kept_rows.iter().any(|&i| m.values[[i, j]] == 1));
        if dropped_rows.is_empty() && dropped_cols.is_empty() {
            break;
        }
        report.removed.extend(dropped_rows.iter().map(|&i| RemovedLabel {
            label: m.location_labels[i].clone(),
            side: Side::Location,
            pass,
        }));
        report.removed.extend(dropped_cols.iter().map(|&j| RemovedLabel {
            label: m.activity_labels[j].clone(),
            side: Side::Activity,
            pass,
        }));
        rows = kept_rows;
        cols = kept_cols;
    }
    if rows.is_empty() || cols.is_empty() {
        return Err(IncidenceError::EmptyAfterPrune);
    }
    Ok((m.select(&rows, &cols), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn output(values: Array2<f64>) -> OutputMatrix<f64> {
        let (r, c) = values.dim();
        OutputMatrix::new(padded_labels("c", r), padded_labels("p", c), values).unwrap()
    }

    #[test]
    fn rca_hand_example() {
        let r = compute_rca(&output(array![[10.0, 0.0], [10.0, 10.0]])).unwrap();
        assert_eq!(r.values, array![[1.5, 0.0], [0.75, 1.5]]);
    }

    #[test]
    fn rca_independence_is_one() {
        let rows = [1.0, 2.0, 4.0];
        let cols = [3.0, 5.0];
        let x = Array2::from_shape_fn((3, 2), |(i, j)| rows[i] * cols[j]);
        let r = compute_rca(&output(x)).unwrap();
        for v in r.values.iter() {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rca_zero_margin() {
        let err = compute_rca(&output(array![[1.0, 0.0], [1.0, 0.0]])).unwrap_err();
        assert_eq!(
            err,
            IncidenceError::ZeroMargin {
                side: Side::Activity,
                label: "p1".into()
            }
        );
    }

    #[test]
    fn binarize_boundaries() {
        let r = SpecializationMatrix {
            values: array![[1.0, 0.999999], [0.75, 1.5]],
            location_labels: padded_labels("c", 2),
            activity_labels: padded_labels("p", 2),
        };
        let m = binarize(&r, 1.0).unwrap();
        assert_eq!(m.values(), &array![[1, 0], [0, 1]]);
        assert!(binarize(&r, 0.0).is_err());
        assert!(binarize(&r, f64::NAN).is_err());
    }

    #[test]
    fn binarize_hand_example() {
        let r = compute_rca(&output(array![[10.0, 0.0], [10.0, 10.0]])).unwrap();
        assert_eq!(binarize(&r, 1.0).unwrap().values(), &array![[1, 0], [0, 1]]);
    }

    #[test]
    fn prune_drops_empty_column() {
        let m = IncidenceMatrix::unlabeled(array![[1, 1, 0], [0, 1, 0]]).unwrap();
        let (pruned, report) = prune_degenerate(&m).unwrap();
        assert_eq!(pruned.values(), &array![[1, 1], [0, 1]]);
        assert_eq!(
            report.removed,
            vec![RemovedLabel {
                label: "p2".into(),
                side: Side::Activity,
                pass: 1
            }]
        );
    }

    #[test]
    fn prune_fixed_point_and_empty() {
        let m = IncidenceMatrix::unlabeled(array![[1, 0], [0, 1]]).unwrap();
        let (pruned, report) = prune_degenerate(&m).unwrap();
        assert_eq!(pruned, m);
        assert!(report.is_empty());
        let zero = IncidenceMatrix::unlabeled(array![[0, 0]]).unwrap();
        assert_eq!(prune_degenerate(&zero).unwrap_err(), IncidenceError::EmptyAfterPrune);
    }

    #[test]
    fn margins() {
        let m = IncidenceMatrix::unlabeled(array![[1, 1], [0, 1]]).unwrap();
        assert_eq!(diversity(&m), vec![2, 1]);
        assert_eq!(ubiquity(&m), vec![1, 2]);
        let eye = IncidenceMatrix::unlabeled(Array2::eye(4)).unwrap();
        assert_eq!(diversity(&eye), vec![1; 4]);
        assert_eq!(ubiquity(&eye), vec![1; 4]);
        let ones = IncidenceMatrix::unlabeled(Array2::ones((3, 5))).unwrap();
        assert_eq!(diversity(&ones), vec![5; 3]);
        assert_eq!(ubiquity(&ones), vec![3; 5]);
    }

    #[test]
    fn label_padding_sorts() {
        let labels = padded_labels("c", 12);
        assert_eq!(labels[2], "c02");
        let mut sorted = labels.clone();
        sorted.sort();
        assert_eq!(sorted, labels);
    }

    #[test]
    fn rejects_non_binary() {
        assert!(IncidenceMatrix::unlabeled(array![[2]]).is_err());
    }
}
