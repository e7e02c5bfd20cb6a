//! Dense symmetric eigensolver and the eigendecomposition of similarity
//! matrices.
//!
//! The symmetric solver reduces the matrix to tridiagonal form with
//! Householder reflections and then runs the implicit QL algorithm with
//! Wilkinson-style shifts (the EISPACK `tred2`/`tql2` pair). Intensive
//! similarity matrices are not symmetric, but `diag(w) M` is for the row
//! weights `w`, so `diag(w)^(1/2) M diag(w)^(-1/2)` is symmetric and similar
//! to `M`: its spectrum is real and the eigenvectors map back through
//! `diag(w)^(-1/2)`.

use ndarray::{Array1, Array2};

use super::{SimilarityMatrix, SpectralError};
use crate::Scalar;

/// Maximum QL sweeps spent on a single eigenvalue.
const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues of a symmetric matrix in ascending order, with orthonormal
/// eigenvectors as the columns of the returned matrix.
///
/// Only the lower triangle is read.
pub fn symmetric_eigen<T: Scalar>(a: &Array2<T>) -> Result<(Vec<T>, Array2<T>), SpectralError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(SpectralError::NotSquare(a.nrows(), a.ncols()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    if n == 0 {
        return Ok((Vec::new(), Array2::zeros((0, 0))));
    }
    let mut v = a.clone();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| v[[r, order[c]]]);
    Ok((values, vectors))
}

/// Householder reduction to tridiagonal form. On return `d` holds the
/// diagonal, `e[1..]` the subdiagonal and `v` the accumulated transform.
fn tridiagonalize<T: Scalar>(v: &mut Array2<T>, d: &mut [T], e: &mut [T]) {
    let n = d.len();
    let zero = T::zero();
    for j in 0..n {
        d[j] = v[[n - 1, j]];
    }
    for i in (1..n).rev() {
        let mut scale = zero;
        let mut h = zero;
        for dk in d.iter().take(i) {
            scale = scale + dk.abs();
        }
        if scale == zero {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[[i - 1, j]];
                v[[i, j]] = zero;
                v[[j, i]] = zero;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk = *dk / scale;
                h = h + *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > zero {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = zero;
            }
            for j in 0..i {
                f = d[j];
                v[[j, i]] = f;
                g = e[j] + v[[j, j]] * f;
                for k in (j + 1)..i {
                    g = g + v[[k, j]] * d[k];
                    e[k] = e[k] + v[[k, j]] * f;
                }
                e[j] = g;
            }
            f = zero;
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[[k, j]] = v[[k, j]] - (f * e[k] + g * d[k]);
                }
                d[j] = v[[i - 1, j]];
                v[[i, j]] = zero;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[[n - 1, i]] = v[[i, i]];
        v[[i, i]] = T::one();
        let h = d[i + 1];
        if h != zero {
            for k in 0..=i {
                d[k] = v[[k, i + 1]] / h;
            }
            for j in 0..=i {
                let mut g = zero;
                for k in 0..=i {
                    g = g + v[[k, i + 1]] * v[[k, j]];
                }
                for k in 0..=i {
                    v[[k, j]] = v[[k, j]] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[[k, i + 1]] = zero;
        }
    }
    for j in 0..n {
        d[j] = v[[n - 1, j]];
        v[[n - 1, j]] = zero;
    }
    v[[n - 1, n - 1]] = T::one();
    e[0] = zero;
}

/// Implicit QL iteration on the tridiagonal form produced by
/// [`tridiagonalize`]. Eigenvalues are left in `d` (unsorted).
fn tridiagonal_ql<T: Scalar>(v: &mut Array2<T>, d: &mut [T], e: &mut [T]) -> Result<(), SpectralError> {
    let n = d.len();
    let zero = T::zero();
    let two = T::lit(2.0);
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = zero;

    let mut f = zero;
    let mut tst1 = zero;
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(SpectralError::ConvergenceFailure(format!(
                        "QL iteration did not converge for eigenvalue {l}"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[[k, i + 1]];
                        v[[k, i + 1]] = s * v[[k, i]] + c * h;
                        v[[k, i]] = c * v[[k, i]] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = zero;
    }
    Ok(())
}

/// Eigenpairs of a similarity matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution<T> {
    pub eigenvalues: Vec<T>,
    /// Unit-norm eigenvectors as columns, aligned with `eigenvalues`.
    pub eigenvectors: Array2<T>,
    /// `max_i |(M v - lambda v)_i|` for each pair, measured on the original
    /// (unsymmetrized) matrix.
    pub residuals: Vec<T>,
}

impl<T: Scalar> EigenSolution<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<T> {
        self.eigenvectors.column(k).to_vec()
    }

    pub fn to_delimited(&self, delimiter: char) -> String {
        let mut w = crate::table::TableWriter::new(delimiter);
        w.row(["index", "eigenvalue", "residual"]);
        for (k, (l, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            w.row([(k + 1).to_string(), l.to_string(), r.to_string()]);
        }
        w.finish()
    }
}

/// Solves the eigenproblem of a similarity matrix through a symmetric
/// similar matrix and verifies every pair against the residual contract.
pub fn eigendecompose<T: Scalar>(s: &SimilarityMatrix<T>) -> Result<EigenSolution<T>, SpectralError> {
    let m = &s.values;
    let n = m.nrows();
    if m.ncols() != n {
        return Err(SpectralError::NotSquare(m.nrows(), m.ncols()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    let half = T::lit(0.5);
    let (sym, back) = match &s.row_weights {
        None => {
            let sym = Array2::from_shape_fn((n, n), |(i, j)| half * (m[[i, j]] + m[[j, i]]));
            (sym, None)
        }
        Some(w) => {
            if w.len() != n || w.iter().any(|&x| !(x > T::zero())) {
                return Err(SpectralError::DegenerateMargins);
            }
            let root: Array1<T> = w.iter().map(|x| x.sqrt()).collect();
            let sym = Array2::from_shape_fn((n, n), |(i, j)| {
                half * (root[i] * m[[i, j]] / root[j] + root[j] * m[[j, i]] / root[i])
            });
            (sym, Some(root))
        }
    };
    let (values, mut vectors) = symmetric_eigen(&sym)?;
    if let Some(root) = back {
        for mut col in vectors.columns_mut() {
            for (x, r) in col.iter_mut().zip(root.iter()) {
                *x = *x / *r;
            }
        }
    }

    // descending order
    let order: Vec<usize> = (0..n).rev().collect();
    let eigenvalues: Vec<T> = order.iter().map(|&k| values[k]).collect();
    let mut eigenvectors = Array2::from_shape_fn((n, n), |(r, c)| vectors[[r, order[c]]]);
    for mut col in eigenvectors.columns_mut() {
        let norm = col.iter().map(|&x| x * x).sum::<T>().sqrt();
        let pivot = col
            .iter()
            .copied()
            .fold(T::zero(), |best, x| if x.abs() > best.abs() { x } else { best });
        let scale = if pivot < T::zero() { -norm } else { norm };
        col.mapv_inplace(|x| x / scale);
    }

    let product = m.dot(&eigenvectors);
    let tol = T::lit(T::RESIDUAL_TOL);
    let mut residuals = Vec::with_capacity(n);
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        let r = (0..n).fold(T::zero(), |acc, i| {
            acc.max((product[[i, k]] - lambda * eigenvectors[[i, k]]).abs())
        });
        if !(r <= tol * lambda.abs().max(T::one())) {
            return Err(SpectralError::ConvergenceFailure(format!(
                "residual {r} for eigenvalue {lambda} exceeds {tol}"
            )));
        }
        residuals.push(r);
    }
    Ok(EigenSolution {
        eigenvalues,
        eigenvectors,
        residuals,
    })
}
