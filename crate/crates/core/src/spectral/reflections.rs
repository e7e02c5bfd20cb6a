use ndarray::Array2;

use super::SpectralError;
use crate::incidence::IncidenceMatrix;
use crate::stats;
use crate::table::TableWriter;
use crate::{Scalar, Side};

/// One step of the method of reflections.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionStep<T> {
    pub iteration: usize,
    pub location_raw: Vec<T>,
    pub activity_raw: Vec<T>,
    /// Z-scored location values; `None` once they carry no variance.
    pub location_standardized: Option<Vec<T>>,
    pub activity_standardized: Option<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionTrajectory<T> {
    pub location_labels: Vec<String>,
    pub activity_labels: Vec<String>,
    /// Step `n` at index `n`; index 0 is the initialization.
    pub steps: Vec<ReflectionStep<T>>,
}

impl<T: Scalar> ReflectionTrajectory<T> {
    /// Long table: `iteration, side, label, raw, standardized`. Missing
    /// standardized values are left empty.
    pub fn to_delimited(&self, delimiter: char) -> String {
        let mut w = TableWriter::new(delimiter);
        w.row(["iteration", "side", "label", "raw", "standardized"]);
        for step in &self.steps {
            let sides = [
                (Side::Location, &self.location_labels, &step.location_raw, &step.location_standardized),
                (Side::Activity, &self.activity_labels, &step.activity_raw, &step.activity_standardized),
            ];
            for (side, labels, raw, z) in sides {
                for (i, label) in labels.iter().enumerate() {
                    let z = z.as_ref().map(|z| z[i].to_string()).unwrap_or_default();
                    w.row([step.iteration.to_string(), side.to_string(), label.clone(), raw[i].to_string(), z]);
                }
            }
        }
        w.finish()
    }
}

/// `out_i = (1 / deg_i) sum_k a_ik x_k`
fn average<T: Scalar>(a: &Array2<T>, degrees: &[usize], x: &[T]) -> Vec<T> {
    a.rows()
        .into_iter()
        .zip(degrees)
        .map(|(row, &d)| row.iter().zip(x).map(|(&w, &v)| w * v).sum::<T>() / T::from_count(d))
        .collect()
}

/// Alternating averages starting from `K_c = M_c`, `K_p = M_p`:
///
/// ```text
/// K_c(n) = (1/M_c) sum_p M_cp K_p(n-1)
/// K_p(n) = (1/M_p) sum_c M_cp K_c(n-1)
/// ```
///
/// The raw values converge to a constant. The z-scored copies are propagated
/// through the same (affine-invariant) update from the previous z-scored
/// values, which equals z-scoring the raw iterate but does not lose the
/// signal to rounding once the raw values have flattened out.
pub fn method_of_reflections<T: Scalar>(
    m: &IncidenceMatrix,
    iterations: usize,
) -> Result<ReflectionTrajectory<T>, SpectralError> {
    if !m.has_positive_margins() {
        return Err(SpectralError::DegenerateMargins);
    }
    let loc = m.oriented::<T>(Side::Location);
    let act = m.oriented::<T>(Side::Activity);
    let (div, ubi) = (m.diversity(), m.ubiquity());
    let zscore = |v: &[T]| stats::standardize(v).ok();

    let kc: Vec<T> = div.iter().map(|&d| T::from_count(d)).collect();
    let kp: Vec<T> = ubi.iter().map(|&u| T::from_count(u)).collect();
    let mut steps = vec![ReflectionStep {
        iteration: 0,
        location_standardized: zscore(&kc),
        activity_standardized: zscore(&kp),
        location_raw: kc,
        activity_raw: kp,
    }];
    for n in 1..=iterations {
        let prev = &steps[n - 1];
        let kc = average(&loc, div, &prev.activity_raw);
        let kp = average(&act, ubi, &prev.location_raw);
        let zc = prev.activity_standardized.as_ref().and_then(|z| zscore(&average(&loc, div, z)));
        let zp = prev.location_standardized.as_ref().and_then(|z| zscore(&average(&act, ubi, z)));
        steps.push(ReflectionStep {
            iteration: n,
            location_raw: kc,
            activity_raw: kp,
            location_standardized: zc,
            activity_standardized: zp,
        });
    }
    Ok(ReflectionTrajectory {
        location_labels: m.location_labels().to_vec(),
        activity_labels: m.activity_labels().to_vec(),
        steps,
    })
}
