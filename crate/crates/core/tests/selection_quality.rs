//! Greedy selection and sampling bounds checked against exhaustive
//! enumeration.

mod common;

use std::time::Instant;

use common::oracles::{
    all_subsets, gaussian_matrix, gram_schmidt_residual, jacobi_eigenvalues, oracle_min_eig,
};
use nalgebra::DMatrix;
use sensel_core::matrixdiag::best_rank_k_error;
use sensel_core::selection::{
    expected_projection_error, greedy_eoptimal, oracle_best_subset, volume_distribution, Objective,
};

#[test]
fn greedy_beats_median_completion() {
    let mut wins = 0;
    for inst in 0..50 {
        let a = gaussian_matrix(10, 6, 300 + inst);
        let g = greedy_eoptimal(&a, 3, Some(0), 0).unwrap();
        let mut completions: Vec<f64> = all_subsets(9, 2)
            .into_iter()
            .map(|pair| {
                let rows = [0, pair[0] + 1, pair[1] + 1];
                oracle_min_eig(&a, &rows)
            })
            .collect();
        completions.sort_by(|x, y| x.total_cmp(y));
        // C(9,2) = 36 completions: the median is the mean of the middle two.
        let median = 0.5 * (completions[17] + completions[18]);
        if g.final_objective() >= median {
            wins += 1;
        }
    }
    assert!(
        wins >= 45,
        "greedy reached the median in {wins}/50 instances"
    );
}

#[test]
fn oracle_dominates_greedy_for_every_init() {
    for inst in 0..10 {
        let a = gaussian_matrix(8, 5, 700 + inst);
        let best = oracle_best_subset(&a, 3, Objective::MinEig).unwrap();
        let brute = all_subsets(8, 3)
            .iter()
            .map(|t| oracle_min_eig(&a, t))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best.final_objective() - brute).abs() < 1e-9 * brute.max(1.0));
        for init in 0..8 {
            let g = greedy_eoptimal(&a, 3, Some(init), 0).unwrap();
            assert!(g.final_objective() <= best.final_objective() + 1e-12);
        }
    }
}

/// Independent best rank-K error through Jacobi eigenvalues of AᵀA.
fn oracle_rank_k_error(a: &DMatrix<f64>, k: usize) -> f64 {
    let eig = jacobi_eigenvalues(&(a.transpose() * a));
    let n = eig.len();
    eig[..n.saturating_sub(k)].iter().map(|v| v.max(0.0)).sum()
}

#[test]
fn volume_sampling_bound_with_independent_oracles() {
    for inst in 0..100 {
        let a = gaussian_matrix(8, 5, 1_000 + inst);
        for k in 1..=4 {
            let dist = volume_distribution(&a, k).unwrap();
            let expected = expected_projection_error(&a, &dist).unwrap();
            // Recompute the expectation with Gram–Schmidt residuals.
            let oracle_expected: f64 = dist
                .subsets
                .iter()
                .zip(&dist.probabilities)
                .map(|(t, p)| p * gram_schmidt_residual(&a, t))
                .sum();
            assert!((expected - oracle_expected).abs() < 1e-8 * oracle_expected.max(1.0));
            let tail = oracle_rank_k_error(&a, k);
            assert!((best_rank_k_error(&a, k) - tail).abs() < 1e-8 * tail.max(1.0));
            assert!(
                expected <= (k + 1) as f64 * tail + 1e-9,
                "instance {inst}, K = {k}"
            );
        }
    }
}

fn best_time(a: &DMatrix<f64>, k: usize) -> f64 {
    (0..5)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(greedy_eoptimal(a, k, Some(0), 0).unwrap());
            start.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn greedy_runtime_scales_linearly_in_sensor_count() {
    let small = gaussian_matrix(400, 12, 1);
    let large = gaussian_matrix(800, 12, 1);
    best_time(&small, 6);
    let ratio = best_time(&large, 6) / best_time(&small, 6);
    assert!(ratio <= 3.0, "doubling M multiplied runtime by {ratio}");
}
