use serde::Serialize;

use super::{
    component_count, eigendecompose, similarity_extensive, similarity_intensive, EigenSolution, SpectralError,
};
use crate::incidence::IncidenceMatrix;
use crate::stats::{self, StatsError};
use crate::table::TableWriter;
use crate::{Scalar, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreKind {
    Eci,
    Pci,
    ExtensiveFirst,
    ExtensiveSecond,
}

impl ScoreKind {
    pub fn name(self) -> &'static str {
        match self {
            ScoreKind::Eci => "eci",
            ScoreKind::Pci => "pci",
            ScoreKind::ExtensiveFirst => "extensive_first",
            ScoreKind::ExtensiveSecond => "extensive_second",
        }
    }
}

/// What fixed the (otherwise arbitrary) sign of an eigenvector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignReference {
    /// Pearson correlation with diversity.
    Diversity,
    /// Pearson correlation with `(1/M_p) sum_c M_cp ECI_c`.
    ProjectedEci,
    /// Sum of the components (Perron vector of a nonnegative matrix).
    ComponentSum,
    /// The reference correlation was too close to zero; the first
    /// largest-magnitude component was made positive instead.
    LargestComponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignConvention<T> {
    pub reference: SignReference,
    /// The reference statistic after the sign was fixed (never negative).
    pub value: T,
}

/// Eigenvector scores of one side of the incidence matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityScores<T> {
    pub kind: ScoreKind,
    pub side: Side,
    pub labels: Vec<String>,
    /// The selected unit-norm eigenvector.
    pub raw: Vec<T>,
    /// Z-score of `raw` (population standard deviation). All zeros for a
    /// constant extensive-first vector.
    pub standardized: Vec<T>,
    pub eigenvalue: T,
    pub sign: SignConvention<T>,
}

impl<T: Scalar> ComplexityScores<T> {
    /// Rank by standardized score, 1 for the highest; ties share the lower
    /// rank number.
    pub fn ranks(&self) -> Vec<usize> {
        stats::descending_rank(&self.standardized)
    }

    pub fn get(&self, label: &str) -> Option<T> {
        self.labels.iter().position(|l| l == label).map(|i| self.standardized[i])
    }

    /// `label, raw, standardized, rank` table.
    pub fn to_delimited(&self, delimiter: char) -> String {
        let mut w = TableWriter::new(delimiter);
        w.row(["label", "raw", "standardized", "rank"]);
        for (((label, raw), z), rank) in self.labels.iter().zip(&self.raw).zip(&self.standardized).zip(self.ranks()) {
            w.row([label.clone(), raw.to_string(), z.to_string(), rank.to_string()]);
        }
        w.finish()
    }
}

/// Z-score with population standard deviation.
pub fn standardize<T: Scalar>(v: &[T]) -> Result<Vec<T>, SpectralError> {
    stats::standardize(v).map_err(|e| match e {
        StatsError::TooShort { got, .. } => {
            SpectralError::DegenerateSpectrum(format!("need at least two entries, got {got}"))
        }
        _ => SpectralError::ZeroVariance,
    })
}

fn as_scalars<T: Scalar>(v: &[usize]) -> Vec<T> {
    v.iter().map(|&x| T::from_count(x)).collect()
}

/// Flips `v` so its correlation with `reference` is nonnegative. When the
/// correlation is negligible, the largest-magnitude component is made
/// positive instead, ties going to the smallest label so that the choice
/// does not depend on row order.
fn fix_sign<T: Scalar>(v: &mut [T], reference: &[T], kind: SignReference, labels: &[String]) -> SignConvention<T> {
    let corr = stats::pearson(v, reference).unwrap_or(T::zero());
    if corr.abs() > T::lit(T::SIGN_TOL) {
        if corr < T::zero() {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        return SignConvention {
            reference: kind,
            value: corr.abs(),
        };
    }
    let largest = v.iter().fold(T::zero(), |best, x| best.max(x.abs()));
    let cutoff = largest * (T::one() - T::lit(T::RESIDUAL_TOL));
    let pivot = (0..v.len())
        .filter(|&i| v[i].abs() >= cutoff)
        .min_by(|&a, &b| labels[a].cmp(&labels[b]))
        .map_or(T::zero(), |i| v[i]);
    if pivot < T::zero() {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    SignConvention {
        reference: SignReference::LargestComponent,
        value: pivot.abs(),
    }
}

fn degenerate(reason: impl Into<String>) -> SpectralError {
    SpectralError::DegenerateSpectrum(reason.into())
}

/// Second eigenpair of the intensive similarity on `side`, after the
/// identification checks.
fn second_intensive_pair<T: Scalar>(m: &IncidenceMatrix, side: Side) -> Result<(T, Vec<T>), SpectralError> {
    let n = m.labels(side).len();
    if n < 2 {
        return Err(degenerate(format!("need at least two {side}s, got {n}")));
    }
    let sim = similarity_intensive::<T>(m, side)?;
    let sol: EigenSolution<T> = eigendecompose(&sim)?;
    let tol = T::lit(T::MULTIPLICITY_TOL);
    let l = &sol.eigenvalues;
    if l[0] - l[n - 1] <= tol {
        return Err(degenerate("all eigenvalues are equal"));
    }
    let components = component_count(m);
    if components > 1 {
        return Err(SpectralError::Disconnected { components });
    }
    if n > 2 && (l[1] - l[2]).abs() <= tol {
        return Err(degenerate(format!("second eigenvalue {} is repeated", l[1])));
    }
    if l[1].abs() <= tol {
        return Err(degenerate("second eigenvalue is zero; no structure beyond size"));
    }
    Ok((l[1], sol.vector(1)))
}

fn build_scores<T: Scalar>(
    m: &IncidenceMatrix,
    kind: ScoreKind,
    side: Side,
    eigenvalue: T,
    mut raw: Vec<T>,
    sign_by: impl FnOnce(&mut [T]) -> SignConvention<T>,
) -> Result<ComplexityScores<T>, SpectralError> {
    let sign = sign_by(&mut raw);
    let standardized = match standardize(&raw) {
        Ok(z) => z,
        // a regular graph has a constant Perron vector: every location ties
        Err(SpectralError::ZeroVariance) if kind == ScoreKind::ExtensiveFirst => vec![T::zero(); raw.len()],
        Err(SpectralError::ZeroVariance) => return Err(degenerate("selected eigenvector has zero variance")),
        Err(other) => return Err(other),
    };
    Ok(ComplexityScores {
        kind,
        side,
        labels: m.labels(side).to_vec(),
        raw,
        standardized,
        eigenvalue,
        sign,
    })
}

/// Economic Complexity Index: second eigenvector of the intensive
/// location-location similarity, standardized, oriented to correlate
/// positively with diversity.
pub fn eci<T: Scalar>(m: &IncidenceMatrix) -> Result<ComplexityScores<T>, SpectralError> {
    let (lambda, raw) = second_intensive_pair::<T>(m, Side::Location)?;
    let diversity = as_scalars::<T>(m.diversity());
    build_scores(m, ScoreKind::Eci, Side::Location, lambda, raw, |v| {
        fix_sign(v, &diversity, SignReference::Diversity, m.location_labels())
    })
}

/// `(1/M_p) sum_c M_cp K_c` for every activity.
fn project_to_activities<T: Scalar>(m: &IncidenceMatrix, location_scores: &[T]) -> Vec<T> {
    let a = m.oriented::<T>(Side::Activity);
    a.rows()
        .into_iter()
        .zip(m.ubiquity())
        .map(|(row, &u)| {
            row.iter().zip(location_scores).map(|(&w, &k)| w * k).sum::<T>() / T::from_count(u)
        })
        .collect()
}

fn pci_given_eci<T: Scalar>(m: &IncidenceMatrix, eci: &ComplexityScores<T>) -> Result<ComplexityScores<T>, SpectralError> {
    let (lambda, raw) = second_intensive_pair::<T>(m, Side::Activity)?;
    let projected = project_to_activities(m, &eci.standardized);
    build_scores(m, ScoreKind::Pci, Side::Activity, lambda, raw, |v| {
        fix_sign(v, &projected, SignReference::ProjectedEci, m.activity_labels())
    })
}

/// Product Complexity Index: the activity-side analog of [`eci`], oriented to
/// correlate positively with the average ECI of the locations holding each
/// activity.
pub fn pci<T: Scalar>(m: &IncidenceMatrix) -> Result<ComplexityScores<T>, SpectralError> {
    let e = eci(m)?;
    pci_given_eci(m, &e)
}

/// ECI and PCI from one call.
pub fn eci_and_pci<T: Scalar>(m: &IncidenceMatrix) -> Result<(ComplexityScores<T>, ComplexityScores<T>), SpectralError> {
    let e = eci(m)?;
    let p = pci_given_eci(m, &e)?;
    Ok((e, p))
}

/// First and second eigenvectors of the extensive location similarity.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensiveScores<T> {
    pub first: ComplexityScores<T>,
    pub second: ComplexityScores<T>,
    pub solution: EigenSolution<T>,
}

/// Leading eigenvectors of `M M^T`. The first is made entrywise nonnegative
/// (Perron vector); the second is oriented by diversity like ECI.
pub fn extensive_scores<T: Scalar>(m: &IncidenceMatrix) -> Result<ExtensiveScores<T>, SpectralError> {
    let n = m.num_locations();
    if n < 2 {
        return Err(degenerate(format!("need at least two locations, got {n}")));
    }
    let sim = similarity_extensive::<T>(m, Side::Location);
    let solution = eigendecompose(&sim)?;
    let diversity = as_scalars::<T>(m.diversity());
    let first = build_scores(
        m,
        ScoreKind::ExtensiveFirst,
        Side::Location,
        solution.eigenvalues[0],
        solution.vector(0),
        |v| {
            let sum: T = v.iter().copied().sum();
            if sum < T::zero() {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            SignConvention {
                reference: SignReference::ComponentSum,
                value: sum.abs(),
            }
        },
    )?;
    let second = build_scores(
        m,
        ScoreKind::ExtensiveSecond,
        Side::Location,
        solution.eigenvalues[1],
        solution.vector(1),
        |v| fix_sign(v, &diversity, SignReference::Diversity, m.location_labels()),
    )?;
    Ok(ExtensiveScores { first, second, solution })
}
