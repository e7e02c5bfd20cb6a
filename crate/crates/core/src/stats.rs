//! Summary statistics used for standardization and score comparison.

use std::cmp::Ordering;

use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("vector has zero variance")]
    ZeroVariance,
    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

pub fn mean<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::from_count(v.len())
}

/// Population standard deviation (divides by `n`).
pub fn population_std<T: Scalar>(v: &[T]) -> T {
    let m = mean(v);
    let ss: T = v.iter().map(|&x| (x - m) * (x - m)).sum();
    (ss / T::from_count(v.len())).sqrt()
}

fn is_effectively_constant<T: Scalar>(v: &[T], std: T) -> bool {
    let scale = v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    std <= T::lit(16.0) * T::epsilon() * scale || std == T::zero()
}

/// Z-score with population standard deviation.
///
/// Vectors whose spread is at the level of rounding noise relative to their
/// magnitude count as constant.
pub fn standardize<T: Scalar>(v: &[T]) -> Result<Vec<T>, StatsError> {
    if v.len() < 2 {
        return Err(StatsError::TooShort { needed: 2, got: v.len() });
    }
    let m = mean(v);
    let s = population_std(v);
    if is_effectively_constant(v, s) {
        return Err(StatsError::ZeroVariance);
    }
    Ok(v.iter().map(|&x| (x - m) / s).collect())
}

/// Pearson correlation coefficient.
pub fn pearson<T: Scalar>(a: &[T], b: &[T]) -> Result<T, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(StatsError::TooShort { needed: 2, got: a.len() });
    }
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = T::zero();
    let mut saa = T::zero();
    let mut sbb = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab = sab + dx * dy;
        saa = saa + dx * dx;
        sbb = sbb + dy * dy;
    }
    let n = T::from_count(a.len());
    if is_effectively_constant(a, (saa / n).sqrt()) || is_effectively_constant(b, (sbb / n).sqrt()) {
        return Err(StatsError::ZeroVariance);
    }
    let r = sab / (saa * sbb).sqrt();
    Ok(r.max(-T::one()).min(T::one()))
}

/// Fractional ranks (1-based, ties get the average of their positions).
pub fn average_ranks<T: Scalar>(v: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![T::zero(); v.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && v[idx[end]] == v[idx[start]] {
            end += 1;
        }
        // positions start..end (0-based) share rank mean(start+1..=end)
        let avg = T::from_count(start + 1 + end) / T::lit(2.0);
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation (Pearson on average ranks).
pub fn spearman<T: Scalar>(a: &[T], b: &[T]) -> Result<T, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    pearson(&average_ranks(a), &average_ranks(b))
}

/// Descending competition rank: 1 for the largest value, ties share the
/// lower rank number ("1224" ranking).
pub fn descending_rank<T: PartialOrd + Copy>(v: &[T]) -> Vec<usize> {
    v.iter()
        .map(|x| 1 + v.iter().filter(|y| *y > x).count())
        .collect()
}
