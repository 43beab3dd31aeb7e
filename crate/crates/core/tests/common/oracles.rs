//! Independent reference computations used by the test suites.
//!
//! Nothing here calls into the library's numerical paths: eigenvalues come
//! from a cyclic Jacobi sweep, projections from modified Gram–Schmidt and
//! the LASSO reference from a plain subgradient method.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

pub fn gaussian_vector(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(g: &DMatrix<f64>) -> Vec<f64> {
    let n = g.nrows();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| g[(i, j)]).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                #[allow(clippy::needless_range_loop)]
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                #[allow(clippy::needless_range_loop)]
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues (min, max) of the 2×2 Gram of columns `i` and `j`.
pub fn closed_form_2x2(phi: &DMatrix<f64>, i: usize, j: usize) -> (f64, f64) {
    let a = phi.column(i).norm_squared();
    let c = phi.column(j).norm_squared();
    let b = phi.column(i).dot(&phi.column(j));
    let mid = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mid - rad, mid + rad)
}

/// Residual of projecting every row of `a` onto the span of `rows`, via
/// modified Gram–Schmidt on the selected rows.
pub fn gram_schmidt_residual(a: &DMatrix<f64>, rows: &[usize]) -> f64 {
    let n = a.ncols();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &r in rows {
        let mut v: Vec<f64> = (0..n).map(|j| a[(r, j)]).collect();
        let orig: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-10 * orig.max(1e-300) {
            basis.push(v.iter().map(|x| x / norm).collect());
        }
    }
    let mut total = 0.0;
    for i in 0..a.nrows() {
        let mut v: Vec<f64> = (0..n).map(|j| a[(i, j)]).collect();
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        total += v.iter().map(|x| x * x).sum::<f64>();
    }
    total
}

/// `‖y − A x‖² + λ‖x‖₁` over the selected rows.
pub fn lasso_objective(a: &DMatrix<f64>, y: &[f64], rows: &[usize], lambda: f64, x: &[f64]) -> f64 {
    let mut fit = 0.0;
    for &m in rows {
        let pred: f64 = (0..a.ncols()).map(|j| a[(m, j)] * x[j]).sum();
        fit += (y[m] - pred).powi(2);
    }
    fit + lambda * x.iter().map(|v| v.abs()).sum::<f64>()
}

/// Subgradient descent on the LASSO objective with a diminishing step,
/// returning the best objective value seen.
pub fn subgradient_lasso(
    a: &DMatrix<f64>,
    y: &[f64],
    rows: &[usize],
    lambda: f64,
    iterations: usize,
) -> f64 {
    let n = a.ncols();
    // Lipschitz scale of the smooth part for step normalisation.
    let mut lip = 0.0;
    for &m in rows {
        lip += (0..n).map(|j| a[(m, j)].powi(2)).sum::<f64>();
    }
    let base = 1.0 / (2.0 * lip.max(1e-12));
    let mut x = vec![0.0; n];
    let mut best = lasso_objective(a, y, rows, lambda, &x);
    for k in 0..iterations {
        let mut g = vec![0.0; n];
        for &m in rows {
            let pred: f64 = (0..n).map(|j| a[(m, j)] * x[j]).sum();
            let r = pred - y[m];
            for j in 0..n {
                g[j] += 2.0 * r * a[(m, j)];
            }
        }
        for j in 0..n {
            g[j] += lambda
                * if x[j] > 0.0 {
                    1.0
                } else if x[j] < 0.0 {
                    -1.0
                } else {
                    0.0
                };
        }
        let step = base / (1.0 + k as f64).sqrt();
        for j in 0..n {
            x[j] -= step * g[j];
        }
        best = best.min(lasso_objective(a, y, rows, lambda, &x));
    }
    best
}

/// Sample covariance of a set of equally long vectors.
pub fn sample_covariance(samples: &[Vec<f64>]) -> DMatrix<f64> {
    let n = samples[0].len();
    let count = samples.len() as f64;
    let mean: Vec<f64> = (0..n)
        .map(|j| samples.iter().map(|s| s[j]).sum::<f64>() / count)
        .collect();
    DMatrix::from_fn(n, n, |i, j| {
        samples
            .iter()
            .map(|s| (s[i] - mean[i]) * (s[j] - mean[j]))
            .sum::<f64>()
            / (count - 1.0)
    })
}

/// Every `k`-subset of `0..n` in lexicographic order.
pub fn all_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// `λ_min` of the selected rows' Gram through the Jacobi oracle, using the
/// same small/accumulated convention as the library.
pub fn oracle_min_eig(a: &DMatrix<f64>, rows: &[usize]) -> f64 {
    let sub = DMatrix::from_fn(rows.len(), a.ncols(), |i, j| a[(rows[i], j)]);
    let g = if rows.len() <= a.ncols() {
        &sub * sub.transpose()
    } else {
        sub.transpose() * &sub
    };
    jacobi_eigenvalues(&g)[0].max(0.0)
}
