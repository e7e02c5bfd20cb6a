//! Comparisons between score vectors and scatter data for plotting.

use std::collections::HashMap;
use std::io::Read;

use serde::Serialize;
use thiserror::Error;

use crate::ingest::{read_delimited_rows, IngestError};
use crate::spectral::ComplexityScores;
use crate::stats::{self, StatsError};
use crate::table::TableWriter;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("only {n} labels in common; need at least 3")]
    InsufficientOverlap { n: usize },
    #[error("{0} has zero variance over the common labels")]
    ZeroVariance(String),
    #[error("score file: {0}")]
    Read(#[from] IngestError),
    #[error("score file line {line}: {message}")]
    BadScoreLine { line: u64, message: String },
}

/// A named score per label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector<T> {
    pub name: String,
    pub labels: Vec<String>,
    pub values: Vec<T>,
}

impl<T: Scalar> LabeledVector<T> {
    pub fn new(name: impl Into<String>, labels: Vec<String>, values: Vec<T>) -> Self {
        Self {
            name: name.into(),
            labels,
            values,
        }
    }

    pub fn from_counts(name: impl Into<String>, labels: &[String], counts: &[usize]) -> Self {
        Self::new(name, labels.to_vec(), counts.iter().map(|&c| T::from_count(c)).collect())
    }

    fn lookup(&self) -> HashMap<&str, T> {
        self.labels.iter().map(String::as_str).zip(self.values.iter().copied()).collect()
    }
}

impl<T: Scalar> From<&ComplexityScores<T>> for LabeledVector<T> {
    fn from(s: &ComplexityScores<T>) -> Self {
        Self::new(s.kind.name(), s.labels.clone(), s.standardized.clone())
    }
}

/// Reads a `label, ...` score file. Takes the `standardized` column when the
/// header has one, the second column otherwise.
pub fn read_score_file<T: Scalar, R: Read>(
    reader: R,
    delimiter: char,
    name: impl Into<String>,
) -> Result<LabeledVector<T>, ReportError> {
    let (header, rows) = read_delimited_rows(reader, delimiter)?;
    let column = header.iter().position(|h| h == "standardized").unwrap_or(1);
    let mut labels = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for row in rows {
        let field = row.fields.get(column).ok_or_else(|| ReportError::BadScoreLine {
            line: row.line,
            message: format!("missing column {}", column + 1),
        })?;
        let value: T = field.parse().map_err(|_| ReportError::BadScoreLine {
            line: row.line,
            message: format!("{field:?} is not a number"),
        })?;
        labels.push(row.fields[0].clone());
        values.push(value);
    }
    Ok(LabeledVector::new(name, labels, values))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub a: String,
    pub b: String,
    pub n: usize,
    pub pearson: f64,
    pub r_squared: f64,
    pub spearman: f64,
}

impl ComparisonReport {
    pub fn header() -> [&'static str; 6] {
        ["a", "b", "n", "pearson", "r_squared", "spearman"]
    }

    pub fn fields(&self) -> [String; 6] {
        [
            self.a.clone(),
            self.b.clone(),
            self.n.to_string(),
            self.pearson.to_string(),
            self.r_squared.to_string(),
            self.spearman.to_string(),
        ]
    }

    pub fn to_delimited(reports: &[ComparisonReport], delimiter: char) -> String {
        let mut w = TableWriter::new(delimiter);
        w.row(Self::header());
        for r in reports {
            w.row(r.fields());
        }
        w.finish()
    }
}

/// Pearson r, R² and Spearman rho over the labels the two vectors share
/// (in the order of `a`).
pub fn compare_vectors<T: Scalar>(a: &LabeledVector<T>, b: &LabeledVector<T>) -> Result<ComparisonReport, ReportError> {
    let lookup = b.lookup();
    let (xs, ys): (Vec<T>, Vec<T>) = a
        .labels
        .iter()
        .zip(&a.values)
        .filter_map(|(l, &x)| lookup.get(l.as_str()).map(|&y| (x, y)))
        .unzip();
    let n = xs.len();
    if n < 3 {
        return Err(ReportError::InsufficientOverlap { n });
    }
    let zero_variance = |e: StatsError| match e {
        StatsError::ZeroVariance => ReportError::ZeroVariance(format!("{} or {}", a.name, b.name)),
        _ => ReportError::InsufficientOverlap { n },
    };
    let r = stats::pearson(&xs, &ys).map_err(zero_variance)?.as_f64();
    let rho = stats::spearman(&xs, &ys).map_err(zero_variance)?.as_f64();
    Ok(ComparisonReport {
        a: a.name.clone(),
        b: b.name.clone(),
        n,
        pearson: r,
        r_squared: r * r,
        spearman: rho,
    })
}

/// One scatter file per score vector: `label, x, y` with `x` the diversity
/// and `y` the standardized score, sorted by label. Returns
/// `(file name, contents)` pairs.
pub fn emit_figure_data<T: Scalar>(
    diversity: &LabeledVector<T>,
    scores: &[&ComplexityScores<T>],
    delimiter: char,
) -> Vec<(String, String)> {
    let div = diversity.lookup();
    scores
        .iter()
        .map(|s| {
            let mut points: Vec<(&str, T, T)> = s
                .labels
                .iter()
                .zip(&s.standardized)
                .filter_map(|(l, &y)| div.get(l.as_str()).map(|&x| (l.as_str(), x, y)))
                .collect();
            points.sort_by(|a, b| a.0.cmp(b.0));
            let mut w = TableWriter::new(delimiter);
            w.row(["label", "x", "y"]);
            for (l, x, y) in points {
                w.row([l.to_string(), x.to_string(), y.to_string()]);
            }
            (format!("figure_{}.csv", s.kind.name()), w.finish())
        })
        .collect()
}
