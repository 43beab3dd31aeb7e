//! Spectral and compressive-sensing diagnostics computed by exact
//! enumeration: row-subset Gram eigenvalues, projection residuals,
//! asymmetric RIP constants, spark, mean minimum eigenvalue and the best
//! rank-K error.
//!
//! All enumerating routines refuse to visit more than
//! [`ENUMERATION_CAP`](crate::linalg::ENUMERATION_CAP) subsets.
//!
//! RIP constants are computed on the matrix as given; normalize the columns
//! first if unit-norm columns are wanted.

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{
    accumulated_gram, binomial, check_cap, frobenius_sq, numerical_rank, row_gram, select_columns,
    select_rows, sym_eigenvalues, sym_min_eigenvalue, RANK_TOLERANCE,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipReport {
    pub order: usize,
    pub delta_lower: f64,
    pub delta_upper: f64,
    pub argmin_subset: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSpectrum {
    pub subset: Vec<usize>,
    pub min_eig: f64,
    pub volume: f64,
}

fn check_rows(a: &DMatrix<f64>, t: &[usize]) -> Result<()> {
    if let Some(&bad) = t.iter().find(|&&m| m >= a.nrows()) {
        return Err(invalid(format!(
            "row index {bad} out of range for {} rows",
            a.nrows()
        )));
    }
    Ok(())
}

/// Minimum eigenvalue of the selected rows' Gram.
///
/// Up to `N` rows this is `λ_min(A_T A_Tᵀ) = σ_min²(A_T)`; beyond `N` rows the
/// `|T|×|T|` Gram is singular, so the `N×N` accumulated Gram
/// `Σ_{m∈T} a_m a_mᵀ` is used instead. Both agree at `|T| = N`.
pub fn row_gram_min_eig(a: &DMatrix<f64>, t: &[usize]) -> Result<f64> {
    if t.is_empty() {
        return Err(invalid("row subset must be nonempty"));
    }
    check_rows(a, t)?;
    Ok(min_eig_unchecked(a, t))
}

pub(crate) fn min_eig_unchecked(a: &DMatrix<f64>, t: &[usize]) -> f64 {
    let g = if t.len() <= a.ncols() {
        row_gram(a, t)
    } else {
        accumulated_gram(a, t)
    };
    sym_min_eigenvalue(g).max(0.0)
}

/// `det(A_T A_Tᵀ)`, zero once `|T|` exceeds the column count.
pub fn subset_volume(a: &DMatrix<f64>, t: &[usize]) -> Result<f64> {
    check_rows(a, t)?;
    Ok(volume_unchecked(a, t))
}

pub(crate) fn volume_unchecked(a: &DMatrix<f64>, t: &[usize]) -> f64 {
    if t.len() > a.ncols() {
        return 0.0;
    }
    if t.is_empty() {
        return 1.0;
    }
    row_gram(a, t).determinant().max(0.0)
}

pub fn subset_spectrum(a: &DMatrix<f64>, t: &[usize]) -> Result<SubsetSpectrum> {
    Ok(SubsetSpectrum {
        subset: t.to_vec(),
        min_eig: row_gram_min_eig(a, t)?,
        volume: volume_unchecked(a, t),
    })
}

/// `‖A − π_T(A)‖_F²`: squared Frobenius distance of every row of `A` from
/// the span of the rows indexed by `t`.
pub fn projection_residual(a: &DMatrix<f64>, t: &[usize]) -> Result<f64> {
    check_rows(a, t)?;
    Ok(residual_unchecked(a, t))
}

pub(crate) fn residual_unchecked(a: &DMatrix<f64>, t: &[usize]) -> f64 {
    if t.is_empty() {
        return frobenius_sq(a);
    }
    let sub = select_rows(a, t);
    let svd = sub.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return frobenius_sq(a);
    }
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > RANK_TOLERANCE * max)
        .map(|(i, _)| i)
        .collect();
    // Orthonormal basis of the row span, one basis vector per row.
    let basis = select_rows(&v_t, &keep);
    let coeffs = a * basis.transpose();
    let projected = coeffs * basis;
    frobenius_sq(&(a - projected))
}

/// Exact asymmetric RIP constants of order `s` by enumerating every column
/// subset of that size.
pub fn rip_constants(phi: &DMatrix<f64>, s: usize) -> Result<RipReport> {
    let n = phi.ncols();
    if s == 0 || s > n {
        return Err(invalid(format!("RIP order {s} must lie in 1..={n}")));
    }
    check_cap(binomial(n, s))?;

    let mut min_low = f64::INFINITY;
    let mut max_high = f64::NEG_INFINITY;
    let mut argmin = Vec::new();
    for cols in (0..n).combinations(s) {
        let sub = select_columns(phi, &cols);
        let eig = sym_eigenvalues(sub.transpose() * &sub);
        let lo = eig[0];
        let hi = eig[eig.len() - 1];
        if lo < min_low {
            min_low = lo;
            argmin = cols;
        }
        max_high = max_high.max(hi);
    }
    Ok(RipReport {
        order: s,
        delta_lower: (1.0 - min_low).clamp(0.0, 1.0),
        delta_upper: (max_high - 1.0).max(0.0),
        argmin_subset: argmin,
    })
}

/// Smallest number of linearly dependent columns, or `N + 1` when every
/// column subset is independent.
pub fn spark(a: &DMatrix<f64>) -> Result<usize> {
    let n = a.ncols();
    let mut visited: u128 = 0;
    for k in 1..=n {
        visited = visited.saturating_add(binomial(n, k));
        check_cap(visited)?;
        if k > a.nrows() {
            // More columns than rows are always dependent.
            return Ok(k);
        }
        for cols in (0..n).combinations(k) {
            if numerical_rank(&select_columns(a, &cols)) < k {
                return Ok(k);
            }
        }
    }
    Ok(n + 1)
}

/// Mean of `σ_min²(A_S)` over all column subsets `S` of size `k`.
pub fn mean_min_eig(a: &DMatrix<f64>, k: usize) -> Result<f64> {
    let n = a.ncols();
    if k == 0 || k > n {
        return Err(invalid(format!("subset size {k} must lie in 1..={n}")));
    }
    let count = binomial(n, k);
    check_cap(count)?;
    let total: f64 = (0..n)
        .combinations(k)
        .map(|cols| {
            let sub = select_columns(a, &cols);
            sym_min_eigenvalue(sub.transpose() * &sub).max(0.0)
        })
        .sum();
    Ok(total / count as f64)
}

/// `1 − mean_min_eig(a, k)`.
pub fn mean_delta_lower(a: &DMatrix<f64>, k: usize) -> Result<f64> {
    Ok(1.0 - mean_min_eig(a, k)?)
}

/// `‖A − A_K‖_F²`, the sum of squared singular values past the `k`-th.
pub fn best_rank_k_error(a: &DMatrix<f64>, k: usize) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let mut sv: Vec<f64> = a
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv.iter().skip(k).map(|s| s * s).sum()
}
