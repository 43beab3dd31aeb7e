//! Small dense helpers shared by the diagnostics and selection code.

use nalgebra::{DMatrix, SymmetricEigen};

/// Default cap on the number of subsets any enumeration may visit.
pub const ENUMERATION_CAP: u128 = 2_000_000;

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

pub fn check_cap(requested: u128) -> crate::Result<()> {
    if requested > ENUMERATION_CAP {
        return Err(crate::Error::Capacity {
            requested,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

pub fn select_rows(a: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), a.ncols(), |i, j| a[(rows[i], j)])
}

pub fn select_columns(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(g: DMatrix<f64>) -> Vec<f64> {
    if g.nrows() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = SymmetricEigen::new(g).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn sym_min_eigenvalue(g: DMatrix<f64>) -> f64 {
    sym_eigenvalues(g).first().copied().unwrap_or(0.0)
}

/// Gram of the selected rows, `A_T A_T^T` (|T| x |T|).
pub fn row_gram(a: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    let k = rows.len();
    let mut g = DMatrix::zeros(k, k);
    for i in 0..k {
        let ri = a.row(rows[i]);
        for j in i..k {
            let v = ri.dot(&a.row(rows[j]));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Accumulated Gram `sum_{m in T} a_m a_m^T` (N x N).
pub fn accumulated_gram(a: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    let n = a.ncols();
    let mut g = DMatrix::zeros(n, n);
    for &m in rows {
        let r = a.row(m);
        for i in 0..n {
            let ri = r[i];
            if ri == 0.0 {
                continue;
            }
            for j in 0..n {
                g[(i, j)] += ri * r[j];
            }
        }
    }
    g
}

/// Numerical rank using the relative singular-value tolerance.
pub fn numerical_rank(a: &DMatrix<f64>) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * max).count()
}

pub fn frobenius_sq(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|v| v * v).sum()
}

pub fn check_finite(a: &DMatrix<f64>, what: &str) -> crate::Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(crate::error::invalid(format!(
            "{what} contains non-finite entries"
        )))
    }
}
