//! Long-format output data: parsing, pivoting into a location x activity
//! matrix, and the left-tail size cut.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use ndarray::Array2;
use thiserror::Error;

use crate::table::format_matrix;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("delimiter {0:?} is not a single ASCII character")]
    InvalidDelimiter(char),
    #[error("line {line}: expected {expected} columns, found {found}")]
    MalformedLine { line: u64, expected: usize, found: usize },
    #[error("line {line}: value {value:?} is not a number")]
    NonNumericValue { line: u64, value: String },
    #[error("line {line}: value {value} is negative")]
    NegativeValue { line: u64, value: String },
    #[error("line {line}: value {value} is not finite")]
    NonFiniteValue { line: u64, value: String },
    #[error("line {line}: empty {column} label")]
    EmptyLabel { line: u64, column: &'static str },
    #[error("no data records")]
    EmptyInput,
    #[error("invalid output matrix: {0}")]
    InvalidMatrix(String),
}

/// One `(location, activity, value)` observation.
#[derive(Debug, Clone, PartialEq)]
pub struct LongRecord<T> {
    pub location: String,
    pub activity: String,
    pub value: T,
}

/// A data row of a delimited table together with its 1-based line number.
#[derive(Debug, Clone, PartialEq)]
pub struct DelimitedRow {
    pub line: u64,
    pub fields: Vec<String>,
}

/// Opens `path` for reading, transparently decompressing `*.gz` files.
pub fn open_input(path: &Path) -> Result<Box<dyn Read>, IngestError> {
    let file = BufReader::new(File::open(path)?);
    if path.extension().is_some_and(|ext| ext == "gz") {
        Ok(Box::new(MultiGzDecoder::new(file)))
    } else {
        Ok(Box::new(file))
    }
}

fn delimiter_byte(delimiter: char) -> Result<u8, IngestError> {
    if delimiter.is_ascii() {
        Ok(delimiter as u8)
    } else {
        Err(IngestError::InvalidDelimiter(delimiter))
    }
}

/// Reads a headed, delimiter-separated table into trimmed string fields.
///
/// Returns the header (empty for an empty stream) and the data rows. Rows are
/// not required to match the header width; callers validate.
pub fn read_delimited_rows<R: Read>(
    reader: R,
    delimiter: char,
) -> Result<(Vec<String>, Vec<DelimitedRow>), IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter_byte(delimiter)?)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push(DelimitedRow {
            line,
            fields: record.iter().map(str::to_owned).collect(),
        });
    }
    Ok((header, rows))
}

fn csv_error(err: csv::Error) -> IngestError {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(e) => IngestError::Io(e),
        other => IngestError::Csv {
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Parses long-format `location, activity, value` records.
///
/// Duplicate pairs are kept as separate records; [`pivot_to_matrix`] sums them.
pub fn parse_long_records<T: Scalar, R: Read>(
    reader: R,
    delimiter: char,
) -> Result<Vec<LongRecord<T>>, IngestError> {
    let (header, rows) = read_delimited_rows(reader, delimiter)?;
    if header.is_empty() && rows.is_empty() {
        return Ok(Vec::new());
    }
    if header.len() != 3 {
        return Err(IngestError::MalformedLine {
            line: 1,
            expected: 3,
            found: header.len(),
        });
    }
    rows.into_iter()
        .map(|DelimitedRow { line, mut fields }| {
            if fields.len() != 3 {
                return Err(IngestError::MalformedLine {
                    line,
                    expected: 3,
                    found: fields.len(),
                });
            }
            let raw = fields.pop().unwrap_or_default();
            let activity = fields.pop().unwrap_or_default();
            let location = fields.pop().unwrap_or_default();
            if location.is_empty() {
                return Err(IngestError::EmptyLabel { line, column: "location" });
            }
            if activity.is_empty() {
                return Err(IngestError::EmptyLabel { line, column: "activity" });
            }
            let value: T = raw.parse().map_err(|_| IngestError::NonNumericValue {
                line,
                value: raw.clone(),
            })?;
            if value.is_nan() || value.is_infinite() {
                return Err(IngestError::NonFiniteValue { line, value: raw });
            }
            if value < T::zero() {
                return Err(IngestError::NegativeValue { line, value: raw });
            }
            Ok(LongRecord {
                location,
                activity,
                value,
            })
        })
        .collect()
}

/// Dense nonnegative location x activity output matrix with its margins.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputMatrix<T> {
    values: Array2<T>,
    location_labels: Vec<String>,
    activity_labels: Vec<String>,
    row_totals: Vec<T>,
    col_totals: Vec<T>,
    grand_total: T,
}

impl<T: Scalar> OutputMatrix<T> {
    pub fn new(
        location_labels: Vec<String>,
        activity_labels: Vec<String>,
        values: Array2<T>,
    ) -> Result<Self, IngestError> {
        if values.dim() != (location_labels.len(), activity_labels.len()) {
            return Err(IngestError::InvalidMatrix(format!(
                "shape {:?} does not match {} x {} labels",
                values.dim(),
                location_labels.len(),
                activity_labels.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(IngestError::InvalidMatrix("entries must be finite and nonnegative".into()));
        }
        check_unique(&location_labels)?;
        check_unique(&activity_labels)?;
        Ok(Self::from_parts(location_labels, activity_labels, values))
    }

    fn from_parts(location_labels: Vec<String>, activity_labels: Vec<String>, values: Array2<T>) -> Self {
        let row_totals: Vec<T> = values.rows().into_iter().map(|r| r.iter().copied().sum()).collect();
        let col_totals: Vec<T> = values.columns().into_iter().map(|c| c.iter().copied().sum()).collect();
        let grand_total = row_totals.iter().copied().sum();
        Self {
            values,
            location_labels,
            activity_labels,
            row_totals,
            col_totals,
            grand_total,
        }
    }

    pub fn empty() -> Self {
        Self::from_parts(Vec::new(), Vec::new(), Array2::zeros((0, 0)))
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn location_labels(&self) -> &[String] {
        &self.location_labels
    }

    pub fn activity_labels(&self) -> &[String] {
        &self.activity_labels
    }

    /// `X_c`
    pub fn row_totals(&self) -> &[T] {
        &self.row_totals
    }

    /// `X_p`
    pub fn col_totals(&self) -> &[T] {
        &self.col_totals
    }

    /// `X`
    pub fn grand_total(&self) -> T {
        self.grand_total
    }

    /// True when no location or no activity is left.
    pub fn is_empty(&self) -> bool {
        self.location_labels.is_empty() || self.activity_labels.is_empty()
    }

    /// Submatrix on the given row and column indices, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let values = Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| self.values[[rows[i], cols[j]]]);
        Self::from_parts(
            rows.iter().map(|&i| self.location_labels[i].clone()).collect(),
            cols.iter().map(|&j| self.activity_labels[j].clone()).collect(),
            values,
        )
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self::from_parts(
            self.location_labels.clone(),
            self.activity_labels.clone(),
            self.values.mapv(|v| v * factor),
        )
    }

    pub fn to_delimited(&self, delimiter: char) -> String {
        format_matrix(delimiter, "location", &self.location_labels, &self.activity_labels, |i, j| {
            self.values[[i, j]]
        })
    }

    /// Drops locations and activities whose total output is zero.
    pub fn without_empty_margins(&self) -> Self {
        filter_to_fixed_point(self, |total| total > T::zero(), |total| total > T::zero())
    }
}

fn check_unique(labels: &[String]) -> Result<(), IngestError> {
    let mut seen = std::collections::HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(IngestError::InvalidMatrix(format!("duplicate label {l:?}")));
        }
    }
    Ok(())
}

/// Sums records by `(location, activity)` into a dense matrix. Labels keep
/// their order of first appearance.
pub fn pivot_to_matrix<T: Scalar>(records: &[LongRecord<T>]) -> Result<OutputMatrix<T>, IngestError> {
    if records.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    let mut loc_index: HashMap<&str, usize> = HashMap::new();
    let mut act_index: HashMap<&str, usize> = HashMap::new();
    let mut locations = Vec::new();
    let mut activities = Vec::new();
    let mut cells = Vec::with_capacity(records.len());
    for r in records {
        let c = *loc_index.entry(r.location.as_str()).or_insert_with(|| {
            locations.push(r.location.clone());
            locations.len() - 1
        });
        let p = *act_index.entry(r.activity.as_str()).or_insert_with(|| {
            activities.push(r.activity.clone());
            activities.len() - 1
        });
        cells.push((c, p, r.value));
    }
    let mut values = Array2::zeros((locations.len(), activities.len()));
    for (c, p, v) in cells {
        values[[c, p]] = values[[c, p]] + v;
    }
    Ok(OutputMatrix::from_parts(locations, activities, values))
}

fn filter_to_fixed_point<T: Scalar>(
    m: &OutputMatrix<T>,
    keep_location: impl Fn(T) -> bool,
    keep_activity: impl Fn(T) -> bool,
) -> OutputMatrix<T> {
    let mut rows: Vec<usize> = (0..m.location_labels.len()).collect();
    let mut cols: Vec<usize> = (0..m.activity_labels.len()).collect();
    loop {
        let row_total = |i: usize| cols.iter().map(|&j| m.values[[i, j]]).sum::<T>();
        let kept_rows: Vec<usize> = rows.iter().copied().filter(|&i| keep_location(row_total(i))).collect();
        let col_total = |j: usize| kept_rows.iter().map(|&i| m.values[[i, j]]).sum::<T>();
        let kept_cols: Vec<usize> = cols.iter().copied().filter(|&j| keep_activity(col_total(j))).collect();
        let changed = kept_rows.len() != rows.len() || kept_cols.len() != cols.len();
        rows = kept_rows;
        cols = kept_cols;
        if !changed {
            break;
        }
    }
    if rows.is_empty() || cols.is_empty() {
        return OutputMatrix::empty();
    }
    m.select(&rows, &cols)
}

/// Repeatedly drops locations with `X_c < min_location_total` and activities
/// with `X_p < min_activity_total`, recomputing totals, until nothing changes.
///
/// Returns an empty matrix when everything is cut. Negative or non-finite
/// thresholds are rejected.
pub fn left_tail_filter<T: Scalar>(
    m: &OutputMatrix<T>,
    min_location_total: T,
    min_activity_total: T,
) -> Result<OutputMatrix<T>, IngestError> {
    for t in [min_location_total, min_activity_total] {
        if !t.is_finite() || t < T::zero() {
            return Err(IngestError::InvalidMatrix(format!("threshold {t} must be finite and >= 0")));
        }
    }
    Ok(filter_to_fixed_point(
        m,
        |total| total >= min_location_total,
        |total| total >= min_activity_total,
    ))
}
