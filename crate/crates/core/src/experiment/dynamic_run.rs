//! Dynamic experiment: the online loop swept over γ and trials.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ONLINE_STREAM, SCENARIO_STREAM, TRUTH_STREAM};
use super::output::{create_file, ensure_dir, join_indices, mean, write_csv, write_text};
use crate::dynamic::{run_online, write_jsonl, TimeBlockRecord, TruthSegment};
use crate::error::{Error, Result};
use crate::metrics::{mean_reliability, normalized_error, reliability_raster, spurious_power};
use crate::scenario::{exact_support, Scenario};

/// One online run for a `(γ, trial)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicRun {
    pub gamma: f64,
    pub trial: usize,
    pub records: Vec<TimeBlockRecord>,
    pub blocks: Vec<BlockRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRow {
    pub gamma: f64,
    pub trial: usize,
    pub t: u64,
    pub state: usize,
    /// First block of a new truth state.
    pub transition: bool,
    pub normalized_error: f64,
    pub mean_reliability: f64,
    pub spurious_power: f64,
    pub active_set: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicSummaryRow {
    pub gamma: f64,
    pub trials: usize,
    /// Mean error over the windows opened by the transitions.
    pub post_transition_error: f64,
    /// Mean network reliability over the blocks of the last state.
    pub final_state_reliability: f64,
    pub mean_error: f64,
    pub mean_spurious_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicOutcome {
    pub runs: Vec<DynamicRun>,
    pub summary: Vec<DynamicSummaryRow>,
    /// Scenario of the first trial, used for the reliability maps.
    pub first_scenario: Scenario,
    pub raster_blocks: Vec<usize>,
    pub raster_resolution: usize,
}

impl DynamicOutcome {
    pub fn summary_for(&self, gamma: f64) -> Option<&DynamicSummaryRow> {
        self.summary.iter().find(|r| r.gamma == gamma)
    }

    /// Writes per-run traces, the block and summary tables and the
    /// reliability maps of the first trial.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let traces = dir.join("traces");
        let maps = dir.join("maps");
        ensure_dir(&traces)?;
        let mut written = Vec::new();
        for run in &self.runs {
            let path = traces.join(format!("gamma-{}_trial-{}.jsonl", run.gamma, run.trial));
            let mut f = create_file(&path)?;
            write_jsonl(&run.records, &mut f)?;
            std::io::Write::flush(&mut f).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            written.push(path);
        }
        let blocks: Vec<&BlockRow> = self.runs.iter().flat_map(|r| &r.blocks).collect();
        written.push(write_csv(dir.join("dynamic_blocks.csv"), &blocks)?);
        written.push(write_csv(dir.join("dynamic_summary.csv"), &self.summary)?);

        if !self.raster_blocks.is_empty() {
            ensure_dir(&maps)?;
        }
        for run in self.runs.iter().filter(|r| r.trial == 0) {
            for &t in &self.raster_blocks {
                let map = reliability_raster(
                    &self.first_scenario,
                    &run.records[t].reliability_snapshot,
                    self.raster_resolution,
                )?;
                let stem = format!("gamma-{}_t-{}", run.gamma, t);
                written.push(write_text(maps.join(format!("{stem}.pgm")), &map.to_pgm())?);
                written.push(write_text(
                    maps.join(format!("{stem}.json")),
                    &map.to_json()?,
                )?);
            }
        }
        Ok(written)
    }
}

fn block_rows(
    gamma: f64,
    trial: usize,
    records: &[TimeBlockRecord],
    segments: &[TruthSegment],
) -> Result<Vec<BlockRow>> {
    let mut rows = Vec::with_capacity(records.len());
    for (state, seg) in segments.iter().enumerate() {
        let support = exact_support(&seg.power);
        for rec in &records[seg.start..seg.end.min(records.len())] {
            rows.push(BlockRow {
                gamma,
                trial,
                t: rec.t,
                state,
                transition: state > 0 && rec.t as usize == seg.start,
                normalized_error: normalized_error(&rec.estimate, &seg.power)?,
                mean_reliability: mean_reliability(&rec.reliability_snapshot),
                spurious_power: spurious_power(&rec.estimate, &support),
                active_set: join_indices(&rec.active_set),
            });
        }
    }
    Ok(rows)
}

/// Runs the online loop for every configured γ (plus the γ = 0 baseline)
/// and every trial.
///
/// Within a trial all γ values share the scenario, the truth schedule and
/// the online seed, so their measurement noise is identical block by block.
pub fn run_dynamic_experiment(cfg: &ExperimentConfig) -> Result<DynamicOutcome> {
    cfg.validate()?;
    let params = cfg.dynamic_params()?;
    let gammas = params.gamma_values();
    let blocks = params.online.blocks;

    let trials: Vec<(Scenario, Vec<TruthSegment>)> = (0..cfg.trials)
        .map(|t| {
            let sc = cfg.scenario.build(cfg.trial_seed(t, SCENARIO_STREAM))?;
            let segs = params
                .schedule
                .segments(&sc, blocks, cfg.trial_seed(t, TRUTH_STREAM))?;
            Ok((sc, segs))
        })
        .collect::<Result<_>>()?;
    for (_, segs) in &trials {
        if segs.iter().any(|s| s.power.iter().all(|v| *v == 0.0)) {
            return Err(Error::Config(
                "every truth state needs at least one active transmitter".into(),
            ));
        }
    }

    let jobs: Vec<(f64, usize)> = gammas
        .iter()
        .flat_map(|&g| (0..cfg.trials).map(move |t| (g, t)))
        .collect();
    let runs: Vec<DynamicRun> = jobs
        .par_iter()
        .map(|&(gamma, trial)| {
            let (sc, segs) = &trials[trial];
            let mut online = params.online.clone();
            online.gamma = gamma;
            online.seed = cfg.trial_seed(trial, ONLINE_STREAM);
            let records = run_online(sc, segs, &online)?;
            let blocks = block_rows(gamma, trial, &records, segs)?;
            Ok(DynamicRun {
                gamma,
                trial,
                records,
                blocks,
            })
        })
        .collect::<Result<_>>()?;

    let window = params.post_transition_window;
    let summary = gammas
        .iter()
        .map(|&gamma| {
            let mine: Vec<&DynamicRun> = runs.iter().filter(|r| r.gamma == gamma).collect();
            let post = mine.iter().map(|run| {
                let (_, segs) = &trials[run.trial];
                mean(segs[1..].iter().flat_map(|s| {
                    let end = (s.start + window).min(s.end);
                    run.blocks[s.start..end].iter().map(|b| b.normalized_error)
                }))
            });
            let last = mine.iter().map(|run| {
                let (_, segs) = &trials[run.trial];
                let s = segs.last().expect("schedule has at least one state");
                mean(
                    run.blocks[s.start..s.end]
                        .iter()
                        .map(|b| b.mean_reliability),
                )
            });
            DynamicSummaryRow {
                gamma,
                trials: mine.len(),
                post_transition_error: mean(post),
                final_state_reliability: mean(last),
                mean_error: mean(
                    mine.iter()
                        .flat_map(|r| r.blocks.iter().map(|b| b.normalized_error)),
                ),
                mean_spurious_power: mean(
                    mine.iter()
                        .flat_map(|r| r.blocks.iter().map(|b| b.spurious_power)),
                ),
            }
        })
        .collect();

    Ok(DynamicOutcome {
        runs,
        summary,
        first_scenario: trials[0].0.clone(),
        raster_blocks: params.raster_blocks.clone(),
        raster_resolution: params.raster_resolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamic::OnlineConfig;
    use crate::experiment::config::{DynamicParams, KValues, ScenarioParams, TruthScheduleConfig};
    use crate::recovery::LassoConfig;

    fn small(blocks: usize, transitions: Vec<usize>) -> ExperimentConfig {
        ExperimentConfig {
            scenario: ScenarioParams {
                side_count: 3,
                area_extent: 10.0,
                sensor_count: 20,
                sparsity: 2,
                snr_db: Some(20.0),
            },
            k_values: KValues::List(vec![4]),
            trials: 2,
            dynamic: Some(DynamicParams {
                online: OnlineConfig {
                    k: 4,
                    low_rate_denominator: 5,
                    gamma: 0.7,
                    blocks,
                    forgetting: 0.1,
                    lasso: LassoConfig::default(),
                    seed: 0,
                },
                schedule: TruthScheduleConfig {
                    transitions,
                    states: None,
                },
                gammas: vec![0.7],
                post_transition_window: 3,
                raster_blocks: vec![0],
                raster_resolution: 4,
            }),
            ..Default::default()
        }
    }

    #[test]
    fn marks_transitions_and_covers_all_blocks() {
        let out = run_dynamic_experiment(&small(12, vec![4, 9])).unwrap();
        assert_eq!(out.runs.len(), 4);
        for run in &out.runs {
            assert_eq!(run.records.len(), 12);
            let marked: Vec<u64> = run
                .blocks
                .iter()
                .filter(|b| b.transition)
                .map(|b| b.t)
                .collect();
            assert_eq!(marked, vec![4, 9]);
            assert_eq!(run.blocks.last().unwrap().state, 2);
        }
        assert_eq!(out.summary.len(), 2);
        assert!(out.summary_for(0.0).is_some() && out.summary_for(0.7).is_some());
    }

    #[test]
    fn gammas_share_the_initial_block() {
        let out = run_dynamic_experiment(&small(6, vec![3])).unwrap();
        for trial in 0..2 {
            let firsts: Vec<&TimeBlockRecord> = out
                .runs
                .iter()
                .filter(|r| r.trial == trial)
                .map(|r| &r.records[0])
                .collect();
            assert_eq!(firsts[0], firsts[1]);
        }
    }

    #[test]
    fn single_block_run() {
        let out = run_dynamic_experiment(&small(1, vec![])).unwrap();
        for run in &out.runs {
            assert_eq!(run.records.len(), 1);
            assert!(!run.blocks[0].transition);
        }
    }

    #[test]
    fn missing_dynamic_block_is_a_config_error() {
        let mut cfg = small(5, vec![]);
        cfg.dynamic = None;
        assert!(matches!(
            run_dynamic_experiment(&cfg),
            Err(Error::Config(_))
        ));
    }
}
