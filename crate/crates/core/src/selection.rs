//! Measurement-independent sensor selection.
//!
//! Greedy E-optimal selection grows the active set one sensor at a time,
//! each time adding the sensor that maximizes the minimum eigenvalue of the
//! selected rows' Gram. The D-optimal greedy baseline maximizes a
//! regularized log-determinant instead. Exhaustive oracles and the exact
//! volume / E-optimal sampling distributions are provided for small
//! instances.
//!
//! Ties are broken toward the lowest sensor index (greedy) or the
//! lexicographically smallest subset (oracle, sampling order).

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    accumulated_gram, binomial, check_cap, check_finite, row_gram, sym_eigenvalues,
};
use crate::matrixdiag::{mean_min_eig, min_eig_unchecked, residual_unchecked, volume_unchecked};
use crate::seed::rng_from_seed;

/// Regularizer added to the Gram before taking the log-determinant.
pub const LOG_DET_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMethod {
    EOptimalGreedy,
    DOptimalGreedy,
    Random,
    Oracle,
    VolumeSample,
    EoptSample,
    ReliableGreedy,
}

impl SelectionMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            SelectionMethod::EOptimalGreedy => "e-optimal-greedy",
            SelectionMethod::DOptimalGreedy => "d-optimal-greedy",
            SelectionMethod::Random => "random",
            SelectionMethod::Oracle => "oracle",
            SelectionMethod::VolumeSample => "volume-sample",
            SelectionMethod::EoptSample => "eopt-sample",
            SelectionMethod::ReliableGreedy => "reliable-greedy",
        }
    }
}

/// Objective used by the exhaustive oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    MinEig,
    LogDet,
}

impl Objective {
    pub fn evaluate(&self, a: &DMatrix<f64>, t: &[usize]) -> f64 {
        match self {
            Objective::MinEig => min_eig_unchecked(a, t),
            Objective::LogDet => log_det_objective(a, t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub selected: Vec<usize>,
    /// Objective of the first `k + 1` selections at entry `k`.
    pub objective_trace: Vec<f64>,
    pub method: SelectionMethod,
    pub seed: u64,
}

impl SelectionResult {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// `log det(Σ_{m∈T} a_m a_mᵀ + εI)` with `ε = LOG_DET_EPSILON`.
///
/// For `|T| ≤ N` this is evaluated through the smaller row Gram using
/// `det(A_TᵀA_T + εI_N) = ε^{N−|T|} det(A_T A_Tᵀ + εI_{|T|})`.
pub fn log_det_objective(a: &DMatrix<f64>, t: &[usize]) -> f64 {
    let n = a.ncols();
    let (eig, pad) = if t.len() <= n {
        (sym_eigenvalues(row_gram(a, t)), n - t.len())
    } else {
        (sym_eigenvalues(accumulated_gram(a, t)), 0)
    };
    pad as f64 * LOG_DET_EPSILON.ln()
        + eig
            .iter()
            .map(|l| (l.max(0.0) + LOG_DET_EPSILON).ln())
            .sum::<f64>()
}

fn check_k(m: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(invalid("selection size K must be at least 1"));
    }
    if k > m {
        return Err(invalid(format!("cannot select K = {k} of M = {m} sensors")));
    }
    Ok(())
}

pub(crate) fn initial_sensor(m: usize, init: Option<usize>, seed: u64) -> Result<usize> {
    match init {
        Some(i) if i >= m => Err(invalid(format!("init sensor {i} out of range for M = {m}"))),
        Some(i) => Ok(i),
        None => Ok(rng_from_seed(seed).random_range(0..m)),
    }
}

/// Index and score of the best candidate; the lowest index wins ties.
pub(crate) fn best_candidate<F>(m: usize, selected: &[usize], score: F) -> (usize, f64)
where
    F: Fn(usize) -> f64 + Sync,
{
    let mut taken = vec![false; m];
    for &s in selected {
        taken[s] = true;
    }
    let scores: Vec<(usize, f64)> = (0..m)
        .into_par_iter()
        .filter(|&c| !taken[c])
        .map(|c| (c, score(c)))
        .collect();
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for (c, s) in scores {
        if s > best.1 || best.0 == usize::MAX {
            best = (c, s);
        }
    }
    best
}

fn greedy_with<F>(
    a: &DMatrix<f64>,
    k: usize,
    init: Option<usize>,
    seed: u64,
    method: SelectionMethod,
    objective: F,
) -> Result<SelectionResult>
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    let m = a.nrows();
    check_k(m, k)?;
    check_finite(a, "gain matrix")?;
    let first = initial_sensor(m, init, seed)?;
    let mut selected = vec![first];
    let mut trace = vec![objective(&selected)];
    while selected.len() < k {
        let (best, score) = best_candidate(m, &selected, |c| {
            let mut t = selected.clone();
            t.push(c);
            objective(&t)
        });
        selected.push(best);
        trace.push(score);
    }
    Ok(SelectionResult {
        selected,
        objective_trace: trace,
        method,
        seed,
    })
}

/// Greedy E-optimal selection.
///
/// Starts from `init` (or a seed-chosen sensor) and repeatedly adds the
/// unselected sensor maximizing [`row_gram_min_eig`](crate::matrixdiag::row_gram_min_eig)
/// of the grown set.
pub fn greedy_eoptimal(
    a: &DMatrix<f64>,
    k: usize,
    init: Option<usize>,
    seed: u64,
) -> Result<SelectionResult> {
    greedy_with(a, k, init, seed, SelectionMethod::EOptimalGreedy, |t| {
        min_eig_unchecked(a, t)
    })
}

/// Greedy D-optimal baseline on the ε-regularized log-determinant.
pub fn greedy_doptimal(
    a: &DMatrix<f64>,
    k: usize,
    init: Option<usize>,
    seed: u64,
) -> Result<SelectionResult> {
    greedy_with(a, k, init, seed, SelectionMethod::DOptimalGreedy, |t| {
        log_det_objective(a, t)
    })
}

/// Uniform `k`-subset of `0..m`, returned in ascending order. There is no
/// objective, so the trace is all NaN.
pub fn random_selection(m: usize, k: usize, seed: u64) -> Result<SelectionResult> {
    if k > m {
        return Err(invalid(format!("cannot select K = {k} of M = {m} sensors")));
    }
    let mut rng = rng_from_seed(seed);
    let mut selected = sample(&mut rng, m, k).into_vec();
    selected.sort_unstable();
    Ok(SelectionResult {
        objective_trace: vec![f64::NAN; selected.len()],
        selected,
        method: SelectionMethod::Random,
        seed,
    })
}

/// Exhaustive argmax of `objective` over all `k`-subsets of rows.
///
/// The returned trace holds the objective of each prefix of the (ascending)
/// optimal subset, so its last entry is the optimum.
pub fn oracle_best_subset(
    a: &DMatrix<f64>,
    k: usize,
    objective: Objective,
) -> Result<SelectionResult> {
    let m = a.nrows();
    check_k(m, k)?;
    check_cap(binomial(m, k))?;
    let subsets: Vec<Vec<usize>> = (0..m).combinations(k).collect();
    let scores: Vec<f64> = subsets
        .par_iter()
        .map(|t| objective.evaluate(a, t))
        .collect();
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    let selected = subsets[best].clone();
    let trace = (1..=k)
        .map(|j| objective.evaluate(a, &selected[..j]))
        .collect();
    Ok(SelectionResult {
        selected,
        objective_trace: trace,
        method: SelectionMethod::Oracle,
        seed: 0,
    })
}

/// Exact distribution over every `k`-subset of rows, lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetDistribution {
    pub subsets: Vec<Vec<usize>>,
    pub probabilities: Vec<f64>,
}

impl SubsetDistribution {
    fn from_weights(subsets: Vec<Vec<usize>>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if total.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !total.is_finite() {
            return Err(Error::DegenerateDistribution);
        }
        Ok(SubsetDistribution {
            subsets,
            probabilities: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    /// A distribution concentrated on one subset.
    pub fn point_mass(subset: Vec<usize>) -> Self {
        SubsetDistribution {
            subsets: vec![subset],
            probabilities: vec![1.0],
        }
    }

    pub fn probability_of(&self, subset: &[usize]) -> Option<f64> {
        self.subsets
            .iter()
            .position(|s| s == subset)
            .map(|i| self.probabilities[i])
    }

    /// Inverse-CDF draw over the enumerated list.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> &[usize] {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, p) in self.probabilities.iter().enumerate() {
            if *p > 0.0 {
                last = i;
            }
            acc += p;
            if u < acc {
                return &self.subsets[i];
            }
        }
        &self.subsets[last]
    }
}

fn enumerate_weighted<F>(a: &DMatrix<f64>, k: usize, weight: F) -> Result<SubsetDistribution>
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    let m = a.nrows();
    check_k(m, k)?;
    check_cap(binomial(m, k))?;
    let subsets: Vec<Vec<usize>> = (0..m).combinations(k).collect();
    let weights: Vec<f64> = subsets.par_iter().map(|t| weight(t)).collect();
    SubsetDistribution::from_weights(subsets, weights)
}

/// Volume sampling: `Pr(T) ∝ det(A_T A_Tᵀ)`.
pub fn volume_distribution(a: &DMatrix<f64>, k: usize) -> Result<SubsetDistribution> {
    enumerate_weighted(a, k, |t| volume_unchecked(a, t))
}

/// E-optimal sampling: `Pr(T) ∝ σ_min²(A_T)`.
pub fn eoptimal_distribution(a: &DMatrix<f64>, k: usize) -> Result<SubsetDistribution> {
    enumerate_weighted(a, k, |t| min_eig_unchecked(a, t))
}

/// Draws one subset; the trace holds the sampling weight of each prefix.
fn sample_from<F>(
    dist: &SubsetDistribution,
    seed: u64,
    method: SelectionMethod,
    weight: F,
) -> SelectionResult
where
    F: Fn(&[usize]) -> f64,
{
    let mut rng = rng_from_seed(seed);
    let selected = dist.sample(&mut rng).to_vec();
    SelectionResult {
        objective_trace: (1..=selected.len())
            .map(|j| weight(&selected[..j]))
            .collect(),
        selected,
        method,
        seed,
    }
}

pub fn volume_sample(a: &DMatrix<f64>, k: usize, seed: u64) -> Result<SelectionResult> {
    let dist = volume_distribution(a, k)?;
    Ok(sample_from(
        &dist,
        seed,
        SelectionMethod::VolumeSample,
        |t| volume_unchecked(a, t),
    ))
}

pub fn eoptimal_sample(a: &DMatrix<f64>, k: usize, seed: u64) -> Result<SelectionResult> {
    let dist = eoptimal_distribution(a, k)?;
    Ok(sample_from(&dist, seed, SelectionMethod::EoptSample, |t| {
        min_eig_unchecked(a, t)
    }))
}

/// `Σ_T Pr(T) ‖A − π_T(A)‖_F²`.
pub fn expected_projection_error(a: &DMatrix<f64>, dist: &SubsetDistribution) -> Result<f64> {
    for t in &dist.subsets {
        if let Some(&bad) = t.iter().find(|&&m| m >= a.nrows()) {
            return Err(invalid(format!("subset row {bad} out of range")));
        }
    }
    Ok(dist
        .subsets
        .par_iter()
        .zip(dist.probabilities.par_iter())
        .filter(|(_, p)| **p > 0.0)
        .map(|(t, p)| p * residual_unchecked(a, t))
        .sum())
}

/// Both sides of the E-optimal sampling projection bound with the unknown
/// row-dependency constant `C` left symbolic.
///
/// The bound reads `E ≤ factor / C`, so `implied_c_max = factor / E` is the
/// largest `C` for which it holds on this matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EoptBoundDiagnostic {
    pub k: usize,
    pub expected_residual: f64,
    /// `(M − K) / (K + 1) · mean σ_min²(K+1 rows) / mean σ_min²(K rows)`.
    pub factor: f64,
    pub implied_c_max: f64,
}

pub fn eoptimal_bound_diagnostic(a: &DMatrix<f64>, k: usize) -> Result<EoptBoundDiagnostic> {
    let m = a.nrows();
    if k + 1 > m {
        return Err(invalid("bound needs K + 1 ≤ M"));
    }
    let dist = eoptimal_distribution(a, k)?;
    let expected = expected_projection_error(a, &dist)?;
    let at = a.transpose();
    let mean_k = mean_min_eig(&at, k)?;
    let mean_k1 = mean_min_eig(&at, k + 1)?;
    let factor = (m - k) as f64 / (k + 1) as f64 * mean_k1 / mean_k;
    Ok(EoptBoundDiagnostic {
        k,
        expected_residual: expected,
        factor,
        implied_c_max: if expected > 0.0 {
            factor / expected
        } else {
            f64::INFINITY
        },
    })
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::testutil::gaussian_matrix;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn selections_are_distinct_and_reproducible(seed in any::<u64>(), k in 1usize..8) {
            let a = gaussian_matrix(10, 4, seed);
            for r in [
                greedy_eoptimal(&a, k, None, seed).unwrap(),
                greedy_doptimal(&a, k, None, seed).unwrap(),
                random_selection(10, k, seed).unwrap(),
            ] {
                let mut s = r.selected.clone();
                s.sort_unstable();
                s.dedup();
                prop_assert_eq!(s.len(), k);
            }
            prop_assert_eq!(greedy_eoptimal(&a, k, None, seed).unwrap(),
                            greedy_eoptimal(&a, k, None, seed).unwrap());
        }

        #[test]
        fn argmax_survives_positive_scaling(seed in any::<u64>(), c in prop::sample::select(vec![0.5, 2.0, 4.0, 3.7])) {
            let a = gaussian_matrix(9, 4, seed);
            let scaled = &a * c;
            prop_assert_eq!(greedy_eoptimal(&a, 5, Some(0), 0).unwrap().selected,
                            greedy_eoptimal(&scaled, 5, Some(0), 0).unwrap().selected);
            prop_assert_eq!(greedy_doptimal(&a, 5, Some(0), 0).unwrap().selected,
                            greedy_doptimal(&scaled, 5, Some(0), 0).unwrap().selected);
            prop_assert_eq!(oracle_best_subset(&a, 3, Objective::MinEig).unwrap().selected,
                            oracle_best_subset(&scaled, 3, Objective::MinEig).unwrap().selected);
            prop_assert_eq!(oracle_best_subset(&a, 3, Objective::LogDet).unwrap().selected,
                            oracle_best_subset(&scaled, 3, Objective::LogDet).unwrap().selected);
        }

        #[test]
        fn distributions_normalize(seed in any::<u64>(), k in 1usize..5) {
            let a = gaussian_matrix(7, 4, seed);
            let v: f64 = volume_distribution(&a, k).unwrap().probabilities.iter().sum();
            let e: f64 = eoptimal_distribution(&a, k).unwrap().probabilities.iter().sum();
            prop_assert!((v - 1.0).abs() <= 1e-12);
            prop_assert!((e - 1.0).abs() <= 1e-12);
        }
    }
}
