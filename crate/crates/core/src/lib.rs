//! Eigenvector measures of productive knowledge from location x activity
//! output data.
//!
//! The pipeline runs
//!
//! 1. [`ingest`]: long-format records, pivoted into an output matrix `X_cp`,
//!    with an optional left-tail size cut;
//! 2. [`incidence`]: revealed comparative advantage
//!    `R_cp = X_cp X / (X_c X_p)`, binarized at `R_cp >= 1` into `M_cp`;
//! 3. [`spectral`]: extensive (`M M^T`) and intensive (row-stochastic)
//!    similarity matrices, their eigenvectors, the Economic and Product
//!    Complexity Indices, and the method of reflections;
//! 4. [`relatedness`]: product-space proximity and relatedness density.
//!
//! [`alphabet`] generates synthetic economies whose capability endowments
//! are known, which makes it possible to check that the indices recover
//! them. [`pipeline`] wires everything together for the command line tool.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`). The type
//! aliases at the crate root fix the scalar to `f64`.
//!
//! ```
//! use ecomplexity::{eci, IncidenceMatrix};
//! use ndarray::array;
//!
//! let m = IncidenceMatrix::unlabeled(array![[1, 1], [0, 1]]).unwrap();
//! let scores = eci::<f64>(&m).unwrap();
//! assert!((scores.standardized[0] - 1.0).abs() < 1e-10);
//! ```

// `!(x > 0)` is used on purpose: NaN has to fail those checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;

use serde::Serialize;

pub mod alphabet;
pub mod incidence;
pub mod ingest;
pub mod pipeline;
pub mod relatedness;
pub mod report;
mod scalar;
pub mod spectral;
pub mod stats;
pub mod table;

pub use alphabet::{
    endowment_rank_oracle, generate_nested_world, generate_random_world, world_to_incidence, AlphabetError,
    AlphabetWorld, RandomWorldParams,
};
pub use incidence::{
    binarize, compute_rca, diversity, prune_degenerate, ubiquity, IncidenceError, IncidenceMatrix, PruneReport,
};
pub use ingest::{left_tail_filter, parse_long_records, pivot_to_matrix, IngestError, LongRecord};
pub use pipeline::{run_pipeline, EmitFlags, PipelineConfig, PipelineError, Stage};
pub use relatedness::{proximity, relatedness_density, RelatednessError};
pub use report::{compare_vectors, emit_figure_data, ComparisonReport, LabeledVector};
pub use scalar::Scalar;
pub use spectral::{
    eci, eci_and_pci, eigendecompose, extensive_scores, largest_component, method_of_reflections, pci,
    similarity_extensive, similarity_intensive, standardize, ScoreKind, SignReference, SimilarityKind,
    SpectralError,
};

pub type OutputMatrix = ingest::OutputMatrix<f64>;
pub type SpecializationMatrix = incidence::SpecializationMatrix<f64>;
pub type SimilarityMatrix = spectral::SimilarityMatrix<f64>;
pub type EigenSolution = spectral::EigenSolution<f64>;
pub type ComplexityScores = spectral::ComplexityScores<f64>;
pub type ExtensiveScores = spectral::ExtensiveScores<f64>;
pub type ReflectionTrajectory = spectral::ReflectionTrajectory<f64>;
pub type ProximityMatrix = relatedness::ProximityMatrix<f64>;
pub type DensityMatrix = relatedness::DensityMatrix<f64>;

/// Which axis of the location x activity matrix a quantity lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Location,
    Activity,
}

impl Side {
    pub fn other(self) -> Self {
        match self {
            Side::Location => Side::Activity,
            Side::Activity => Side::Location,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Location => "location",
            Side::Activity => "activity",
        })
    }
}

/// Any error raised by the library modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Incidence(#[from] IncidenceError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Relatedness(#[from] RelatednessError),
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
    #[error(transparent)]
    Report(#[from] report::ReportError),
    #[error(transparent)]
    Config(#[from] pipeline::ConfigError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
