//! Shared helpers for the integration tests: an independent eigensolver,
//! brute-force reference computations and seeded instance generators.
#![allow(dead_code)]

use ecomplexity::{largest_component, prune_degenerate, IncidenceMatrix};
use ndarray::Array2;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Cyclic Jacobi rotations. Eigenvalues descending, eigenvectors in columns.
pub fn jacobi_eigen(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = Array2::<f64>::eye(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[[i, j]].powi(2)).sum();
        let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[j, j]].total_cmp(&a[[i, i]]));
    let values = order.iter().map(|&i| a[[i, i]]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| v[[r, order[c]]]);
    (values, vectors)
}

/// Intensive location similarity straight from the definition, with loops.
pub fn brute_intensive(m: &IncidenceMatrix) -> Array2<f64> {
    let v = m.values();
    let (c, p) = v.dim();
    let div: Vec<f64> = (0..c).map(|i| (0..p).map(|j| f64::from(v[[i, j]])).sum()).collect();
    let ubi: Vec<f64> = (0..p).map(|j| (0..c).map(|i| f64::from(v[[i, j]])).sum()).collect();
    Array2::from_shape_fn((c, c), |(a, b)| {
        (0..p).map(|j| f64::from(v[[a, j]]) * f64::from(v[[b, j]]) / ubi[j]).sum::<f64>() / div[a]
    })
}

/// `D^{1/2} A D^{-1/2}` for the row-stochastic `A = diag(1/deg) W`; symmetric
/// when `W` is.
pub fn symmetrize(a: &Array2<f64>, degrees: &[usize]) -> Array2<f64> {
    let w: Vec<f64> = degrees.iter().map(|&d| (d as f64).sqrt()).collect();
    Array2::from_shape_fn(a.dim(), |(i, j)| w[i] * a[[i, j]] / w[j])
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Bernoulli(`density`) entries, not pruned.
pub fn bernoulli_matrix(rng: &mut StdRng, rows: usize, cols: usize, density: f64) -> Array2<u8> {
    Array2::from_shape_fn((rows, cols), |_| u8::from(rng.gen_bool(density)))
}

/// Bernoulli instance with `rows` in `5..=max_rows`, `cols` in
/// `5..=max_cols` and density drawn from `density`, pruned and restricted to
/// its largest component (redrawn until it is at least 3 x 3).
pub fn random_instance(seed: u64, max_rows: usize, max_cols: usize, density: (f64, f64)) -> IncidenceMatrix {
    let mut r = rng(seed);
    loop {
        let rows = r.gen_range(5..=max_rows);
        let cols = r.gen_range(5..=max_cols);
        let p = if density.0 == density.1 { density.0 } else { r.gen_range(density.0..=density.1) };
        let values = bernoulli_matrix(&mut r, rows, cols, p);
        let m = IncidenceMatrix::unlabeled(values).unwrap();
        let Ok((pruned, _)) = prune_degenerate(&m) else { continue };
        let (main, _) = largest_component(&pruned);
        if main.num_locations() >= 3 && main.num_activities() >= 3 {
            return main;
        }
    }
}

/// Up to 80 x 120 with density in [0.2, 0.5].
pub fn random_connected(seed: u64) -> IncidenceMatrix {
    random_instance(seed, 80, 120, (0.2, 0.5))
}

/// Up to 50 x 80 with density 0.3.
pub fn random_sparse(seed: u64) -> IncidenceMatrix {
    random_instance(seed, 50, 80, (0.3, 0.3))
}

/// Latent-capability instances: location `c` has capability `a_c`, activity
/// `p` has requirement `b_p`, both uniform on [0, 1], and
/// `P(M_cp = 1) = 1 / (1 + exp(-k (a_c - b_p)))`. Pruned and restricted to
/// the largest component.
pub fn capability_model(seed: u64, steepness: f64) -> IncidenceMatrix {
    let mut r = rng(seed);
    loop {
        let rows = r.gen_range(10..=60);
        let cols = r.gen_range(20..=100);
        let a: Vec<f64> = (0..rows).map(|_| r.gen::<f64>()).collect();
        let b: Vec<f64> = (0..cols).map(|_| r.gen::<f64>()).collect();
        let values = Array2::from_shape_fn((rows, cols), |(i, j)| {
            let p = 1.0 / (1.0 + (-steepness * (a[i] - b[j])).exp());
            u8::from(r.gen_bool(p))
        });
        let m = IncidenceMatrix::unlabeled(values).unwrap();
        let Ok((pruned, _)) = prune_degenerate(&m) else { continue };
        let (main, _) = largest_component(&pruned);
        if main.num_locations() >= 3 && main.num_activities() >= 3 {
            return main;
        }
    }
}
