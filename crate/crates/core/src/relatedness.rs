//! Activity-activity proximity and location-specific relatedness density.
//!
//! Proximity is the minimum of the two conditional probabilities of
//! co-occurrence, written with a max in the denominator:
//!
//! ```text
//! phi_pq = (sum_c M_cp M_cq) / max(M_p, M_q),   phi_pp = 1
//! ```
//!
//! Density is the proximity-weighted share of an activity's neighbors that a
//! location already holds. The activity itself is excluded from both sums so
//! that held and unheld activities are scored the same way:
//!
//! ```text
//! omega_cp = sum_{q != p} M_cq phi_pq / sum_{q != p} phi_pq
//! ```

use ndarray::Array2;
use thiserror::Error;

use crate::incidence::IncidenceMatrix;
use crate::table::{format_matrix, TableWriter};
use crate::{Scalar, Side};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelatednessError {
    #[error("matrix has an empty row or column; prune it first")]
    DegenerateMargins,
    #[error("activity {0:?} has zero proximity to every other activity")]
    IsolatedActivity(String),
    #[error("proximity labels do not match the incidence matrix")]
    LabelMismatch,
}

/// Symmetric activity x activity proximity with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityMatrix<T> {
    pub values: Array2<T>,
    pub activity_labels: Vec<String>,
}

impl<T: Scalar> ProximityMatrix<T> {
    pub fn to_delimited(&self, delimiter: char) -> String {
        format_matrix(delimiter, "activity", &self.activity_labels, &self.activity_labels, |i, j| {
            self.values[[i, j]]
        })
    }

    /// Upper-triangle edges `(a, b, phi)` with `phi >= min_phi`, diagonal excluded.
    pub fn edges(&self, min_phi: T) -> Vec<(&str, &str, T)> {
        let n = self.activity_labels.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let phi = self.values[[i, j]];
                if phi >= min_phi {
                    out.push((self.activity_labels[i].as_str(), self.activity_labels[j].as_str(), phi));
                }
            }
        }
        out
    }

    pub fn edge_list(&self, delimiter: char, min_phi: T) -> String {
        let mut w = TableWriter::new(delimiter);
        w.row(["activityA", "activityB", "phi"]);
        for (a, b, phi) in self.edges(min_phi) {
            w.row([a.to_string(), b.to_string(), phi.to_string()]);
        }
        w.finish()
    }
}

/// Relatedness density of every location-activity pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    pub values: Array2<T>,
    pub location_labels: Vec<String>,
    pub activity_labels: Vec<String>,
}

impl<T: Scalar> DensityMatrix<T> {
    pub fn to_delimited(&self, delimiter: char) -> String {
        format_matrix(delimiter, "location", &self.location_labels, &self.activity_labels, |i, j| {
            self.values[[i, j]]
        })
    }
}

pub fn proximity<T: Scalar>(m: &IncidenceMatrix) -> Result<ProximityMatrix<T>, RelatednessError> {
    if !m.has_positive_margins() {
        return Err(RelatednessError::DegenerateMargins);
    }
    let a = m.oriented::<T>(Side::Activity);
    let co = a.dot(&a.t());
    let ubiquity = m.ubiquity();
    let values = Array2::from_shape_fn(co.dim(), |(p, q)| {
        if p == q {
            T::one()
        } else {
            co[[p, q]] / T::from_count(ubiquity[p].max(ubiquity[q]))
        }
    });
    Ok(ProximityMatrix {
        values,
        activity_labels: m.activity_labels().to_vec(),
    })
}

pub fn relatedness_density<T: Scalar>(
    m: &IncidenceMatrix,
    phi: &ProximityMatrix<T>,
) -> Result<DensityMatrix<T>, RelatednessError> {
    if phi.activity_labels != m.activity_labels() {
        return Err(RelatednessError::LabelMismatch);
    }
    let p = m.num_activities();
    let mut off_diagonal = phi.values.clone();
    for k in 0..p {
        off_diagonal[[k, k]] = T::zero();
    }
    let denominators: Vec<T> = off_diagonal.rows().into_iter().map(|r| r.iter().copied().sum()).collect();
    if let Some(k) = denominators.iter().position(|&d| !(d > T::zero())) {
        return Err(RelatednessError::IsolatedActivity(m.activity_labels()[k].clone()));
    }
    let held = m.oriented::<T>(Side::Location);
    // phi is symmetric, so held . phi gives sum_q M_cq phi_qp = sum_q M_cq phi_pq
    let mut values = held.dot(&off_diagonal);
    for mut row in values.rows_mut() {
        for (x, &d) in row.iter_mut().zip(&denominators) {
            *x = (*x / d).min(T::one());
        }
    }
    Ok(DensityMatrix {
        values,
        location_labels: m.location_labels().to_vec(),
        activity_labels: m.activity_labels().to_vec(),
    })
}
