//! Similarity matrices between locations (or activities), their spectra, and
//! the complexity indices read off them.
//!
//! Two similarity kinds are supported. The *extensive* kind adds shared
//! activities, `M M^T`, and grows with the size of a location. The
//! *intensive* kind averages instead of adding:
//!
//! ```text
//! S_cc' = (1 / M_c) * sum_p M_cp M_c'p / M_p
//! ```
//!
//! which is row-stochastic, so its leading eigenvector is constant and the
//! informative direction is the second one (ECI on the location side, PCI on
//! the activity side).

mod components;
mod eigen;
mod reflections;
mod scores;

use ndarray::Array2;
use serde::Serialize;
use thiserror::Error;

use crate::incidence::IncidenceMatrix;
use crate::table::format_matrix;
use crate::{Scalar, Side};

pub use components::{component_count, largest_component, ComponentReport, ExcludedLabel};
pub use eigen::{eigendecompose, symmetric_eigen, EigenSolution};
pub use reflections::{method_of_reflections, ReflectionStep, ReflectionTrajectory};
pub use scores::{
    eci, eci_and_pci, extensive_scores, pci, standardize, ComplexityScores, ExtensiveScores, ScoreKind,
    SignConvention, SignReference,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix has an empty row or column; prune it first")]
    DegenerateMargins,
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("co-occurrence graph has {components} connected components; restrict to the largest first")]
    Disconnected { components: usize },
    #[error("eigensolver failed: {0}")]
    ConvergenceFailure(String),
    #[error("matrix is {0} x {1}, expected square")]
    NotSquare(usize, usize),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("vector has zero variance")]
    ZeroVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityKind {
    Extensive,
    Intensive,
}

/// Square similarity matrix over the locations or the activities.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix<T> {
    pub values: Array2<T>,
    pub labels: Vec<String>,
    pub kind: SimilarityKind,
    pub side: Side,
    /// Positive weights `w` with `diag(w) * values` symmetric; set for the
    /// intensive kind (the degrees of the side). `None` means `values` is
    /// symmetric itself.
    pub row_weights: Option<Vec<T>>,
}

impl<T: Scalar> SimilarityMatrix<T> {
    pub fn to_delimited(&self, delimiter: char) -> String {
        let corner = match self.side {
            Side::Location => "location",
            Side::Activity => "activity",
        };
        format_matrix(delimiter, corner, &self.labels, &self.labels, |i, j| self.values[[i, j]])
    }
}

/// `M M^T` (location side) or `M^T M` (activity side): entry `(i, j)` counts
/// the activities (locations) shared by `i` and `j`.
pub fn similarity_extensive<T: Scalar>(m: &IncidenceMatrix, side: Side) -> SimilarityMatrix<T> {
    let a = m.oriented::<T>(side);
    SimilarityMatrix {
        values: a.dot(&a.t()),
        labels: m.labels(side).to_vec(),
        kind: SimilarityKind::Extensive,
        side,
        row_weights: None,
    }
}

/// Row-stochastic averaged co-occurrence matrix. On the location side
/// `S_cc' = (1/M_c) sum_p M_cp M_c'p / M_p`; the activity side swaps roles.
pub fn similarity_intensive<T: Scalar>(m: &IncidenceMatrix, side: Side) -> Result<SimilarityMatrix<T>, SpectralError> {
    if !m.has_positive_margins() {
        return Err(SpectralError::DegenerateMargins);
    }
    let a = m.oriented::<T>(side);
    let own: Vec<T> = m.degrees(side).iter().map(|&d| T::from_count(d)).collect();
    let other: Vec<T> = m.degrees(side.other()).iter().map(|&d| T::from_count(d)).collect();
    let mut scaled = a.clone();
    for mut row in scaled.rows_mut() {
        for (x, &d) in row.iter_mut().zip(&other) {
            *x = *x / d;
        }
    }
    let mut values = scaled.dot(&a.t());
    for (mut row, &d) in values.rows_mut().into_iter().zip(&own) {
        row.mapv_inplace(|x| x / d);
    }
    Ok(SimilarityMatrix {
        values,
        labels: m.labels(side).to_vec(),
        kind: SimilarityKind::Intensive,
        side,
        row_weights: Some(own),
    })
}
