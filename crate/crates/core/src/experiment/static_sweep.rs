//! Static selection sweep over methods, active-set sizes and trials.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{
    ExperimentConfig, StaticMethod, MEASUREMENT_STREAM, SCENARIO_STREAM, SELECTION_STREAM,
};
use super::output::{ensure_dir, mean, write_csv};
use crate::error::Result;
use crate::metrics::{normalized_error, recovery_success, spurious_power};
use crate::recovery::irls_lasso;
use crate::scenario::sample_measurements;
use crate::selection::{
    greedy_doptimal, greedy_eoptimal, oracle_best_subset, random_selection, Objective,
};

/// One `(method, K, trial)` outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticTrialRow {
    pub method: StaticMethod,
    pub k: usize,
    pub trial: usize,
    pub success: bool,
    pub normalized_error: f64,
    pub spurious_power: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticSummaryRow {
    pub method: StaticMethod,
    pub k: usize,
    pub trials: usize,
    pub success_rate: f64,
    pub mean_normalized_error: f64,
    pub mean_spurious_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticOutcome {
    pub rows: Vec<StaticTrialRow>,
    pub summary: Vec<StaticSummaryRow>,
}

impl StaticOutcome {
    pub fn success_rate(&self, method: StaticMethod, k: usize) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.method == method && r.k == k)
            .map(|r| r.success_rate)
    }

    /// Writes `static_trials.csv` and `static_summary.csv` into `dir`.
    pub fn write(&self, dir: &std::path::Path) -> Result<Vec<PathBuf>> {
        ensure_dir(dir)?;
        Ok(vec![
            write_csv(dir.join("static_trials.csv"), &self.rows)?,
            write_csv(dir.join("static_summary.csv"), &self.summary)?,
        ])
    }
}

fn select(method: StaticMethod, a: &crate::GainMatrix, k: usize, seed: u64) -> Result<Vec<usize>> {
    Ok(match method {
        StaticMethod::EOptimal => greedy_eoptimal(a, k, None, seed)?.selected,
        StaticMethod::DOptimal => greedy_doptimal(a, k, None, seed)?.selected,
        StaticMethod::Random => random_selection(a.nrows(), k, seed)?.selected,
        StaticMethod::Oracle => oracle_best_subset(a, k, Objective::MinEig)?.selected,
    })
}

fn run_trial(cfg: &ExperimentConfig, ks: &[usize], trial: usize) -> Result<Vec<StaticTrialRow>> {
    let sc = cfg.scenario.build(cfg.trial_seed(trial, SCENARIO_STREAM))?;
    let y = sample_measurements(&sc, cfg.trial_seed(trial, MEASUREMENT_STREAM)).values;
    let sel_seed = cfg.trial_seed(trial, SELECTION_STREAM);
    let a = &sc.gain;
    let truth = &sc.true_power;
    let support = sc.true_support();
    let k_max = ks.iter().copied().max().unwrap_or(0);

    let mut rows = Vec::with_capacity(cfg.methods.len() * ks.len());
    for &method in &cfg.methods {
        // Greedy selections are nested in K, so one run at the largest K
        // serves every smaller K unless per-K timing is wanted.
        let nested =
            matches!(method, StaticMethod::EOptimal | StaticMethod::DOptimal) && !cfg.timing;
        let longest = if nested {
            Some(select(method, a, k_max, sel_seed)?)
        } else {
            None
        };
        for &k in ks {
            let start = Instant::now();
            let selected = match &longest {
                Some(full) => full[..k].to_vec(),
                None => select(method, a, k, sel_seed)?,
            };
            let estimate = irls_lasso(a, &y, &selected, &cfg.lasso)?.estimate;
            let wall_ms = if cfg.timing {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            rows.push(StaticTrialRow {
                method,
                k,
                trial,
                success: recovery_success(&estimate, truth, cfg.support_tau),
                normalized_error: normalized_error(&estimate, truth)?,
                spurious_power: spurious_power(&estimate, &support),
                wall_ms,
            });
        }
    }
    Ok(rows)
}

/// Runs every `(method, K, trial)` combination.
///
/// Each trial draws its scenario, measurements and selection seed from the
/// master seed, so all methods and K values in a trial see the same
/// network and the same noise. Rows are sorted by `(method, K, trial)`.
pub fn run_static_sweep(cfg: &ExperimentConfig) -> Result<StaticOutcome> {
    cfg.validate()?;
    if cfg.scenario.sparsity == 0 {
        return Err(crate::Error::Config(
            "the static sweep needs at least one active transmitter".into(),
        ));
    }
    let ks = cfg.k_list()?;
    let per_trial: Vec<Result<Vec<StaticTrialRow>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, &ks, t))
        .collect();
    let mut rows = Vec::with_capacity(cfg.trials * ks.len() * cfg.methods.len());
    for r in per_trial {
        rows.extend(r?);
    }
    rows.sort_by_key(|r| (r.method, r.k, r.trial));

    let summary = rows
        .chunk_by(|a, b| a.method == b.method && a.k == b.k)
        .map(|g| StaticSummaryRow {
            method: g[0].method,
            k: g[0].k,
            trials: g.len(),
            success_rate: g.iter().filter(|r| r.success).count() as f64 / g.len() as f64,
            mean_normalized_error: mean(g.iter().map(|r| r.normalized_error)),
            mean_spurious_power: mean(g.iter().map(|r| r.spurious_power)),
        })
        .collect();
    Ok(StaticOutcome { rows, summary })
}
