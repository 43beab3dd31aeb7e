//! Reliability tracking and dynamic sensor selection.
//!
//! Every sensor carries a reliability
//!
//! ```text
//! r_m = exp(−σ_f (t − t_m)) / (1 + |y_m − a_mᵀ x_prev|²)
//! ```
//!
//! combining how fresh its last report is with how well the previous power
//! estimate predicts that report. The active set is re-chosen each block by
//! a greedy that trades the E-optimal objective against the squared
//! unreliability `u_m = 1 / r_m` of the candidates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::check_finite;
use crate::matrixdiag::min_eig_unchecked;
use crate::recovery::{irls_lasso, Lambda, LassoConfig};
use crate::scenario::{measure, Scenario};
use crate::seed::derive_seed;
use crate::selection::{
    best_candidate, greedy_eoptimal, initial_sensor, SelectionMethod, SelectionResult,
};

/// Lower clamp on reliability, keeping unreliability finite.
pub const RELIABILITY_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityState {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub t_last: Vec<u64>,
    pub y_last: Vec<f64>,
    pub forgetting: f64,
}

impl ReliabilityState {
    /// Fully reliable state after one complete sweep at block `t`.
    pub fn fresh(y: &[f64], t: u64, forgetting: f64) -> Self {
        let m = y.len();
        ReliabilityState {
            r: vec![1.0; m],
            u: vec![1.0; m],
            t_last: vec![t; m],
            y_last: y.to_vec(),
            forgetting,
        }
    }

    /// Records a fresh report from sensor `m` at block `t`.
    pub fn observe(&mut self, m: usize, t: u64, y: f64) {
        self.t_last[m] = t;
        self.y_last[m] = y;
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}

/// `a_mᵀ x_prev`.
pub fn predict_measurement(a: &DMatrix<f64>, m: usize, x_prev: &[f64]) -> f64 {
    a.row(m).iter().zip(x_prev).map(|(g, x)| g * x).sum()
}

pub fn reliability(forgetting: f64, age: u64, mismatch: f64) -> f64 {
    let r = (-forgetting * age as f64).exp() / (1.0 + mismatch * mismatch);
    r.clamp(RELIABILITY_FLOOR, 1.0)
}

/// Recomputes `r` and `u` for every sensor at block `t` against the
/// previous estimate `x_prev`.
pub fn update_reliability(
    state: &ReliabilityState,
    t: u64,
    a: &DMatrix<f64>,
    x_prev: &[f64],
) -> ReliabilityState {
    let predicted = a * DVector::from_column_slice(x_prev);
    let r: Vec<f64> = (0..state.len())
        .map(|m| {
            let age = t.saturating_sub(state.t_last[m]);
            reliability(state.forgetting, age, state.y_last[m] - predicted[m])
        })
        .collect();
    let u = r.iter().map(|v| 1.0 / v).collect();
    ReliabilityState {
        r,
        u,
        t_last: state.t_last.clone(),
        y_last: state.y_last.clone(),
        forgetting: state.forgetting,
    }
}

/// Reliability-regularized greedy selection.
///
/// Each step adds the unselected sensor maximizing
/// `row_gram_min_eig(S ∪ {m}) + γ·u_m²`. The first sensor is `init` when
/// given. Otherwise, with `γ = 0` it is drawn from `seed` exactly as in
/// [`greedy_eoptimal`], and with `γ > 0` it is the argmax of the same score
/// over the empty set.
pub fn reliable_greedy_select(
    a: &DMatrix<f64>,
    u: &[f64],
    k: usize,
    gamma: f64,
    init: Option<usize>,
    seed: u64,
) -> Result<SelectionResult> {
    let m = a.nrows();
    if u.len() != m {
        return Err(invalid("unreliability vector length must equal M"));
    }
    if u.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(invalid("unreliability entries must be positive and finite"));
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(invalid("gamma must be nonnegative"));
    }
    if gamma == 0.0 {
        let mut r = greedy_eoptimal(a, k, init, seed)?;
        r.method = SelectionMethod::ReliableGreedy;
        return Ok(r);
    }
    if k == 0 || k > m {
        return Err(invalid(format!("cannot select K = {k} of M = {m} sensors")));
    }
    check_finite(a, "gain matrix")?;

    let score = |t: &[usize], c: usize| min_eig_unchecked(a, t) + gamma * u[c] * u[c];
    let mut selected = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);
    match init {
        Some(_) => {
            let first = initial_sensor(m, init, seed)?;
            selected.push(first);
            trace.push(score(&selected, first));
        }
        None => {
            let (c, s) = best_candidate(m, &selected, |c| score(&[c], c));
            selected.push(c);
            trace.push(s);
        }
    }
    while selected.len() < k {
        let (best, s) = best_candidate(m, &selected, |c| {
            let mut t = selected.clone();
            t.push(c);
            score(&t, c)
        });
        selected.push(best);
        trace.push(s);
    }
    Ok(SelectionResult {
        selected,
        objective_trace: trace,
        method: SelectionMethod::ReliableGreedy,
        seed,
    })
}

/// Round-robin low-rate schedule: sensor `m` reports at block `t` iff
/// `m mod n_l == t mod n_l`.
pub fn low_rate_schedule(m: usize, n_l: usize, t: u64) -> Vec<usize> {
    let n_l = n_l.max(1);
    let phase = (t % n_l as u64) as usize;
    (phase..m).step_by(n_l).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineConfig {
    #[serde(rename = "k", alias = "K")]
    pub k: usize,
    pub low_rate_denominator: usize,
    pub gamma: f64,
    pub blocks: usize,
    #[serde(default)]
    pub forgetting: f64,
    #[serde(default = "online_lasso")]
    pub lasso: LassoConfig,
    #[serde(default)]
    pub seed: u64,
}

/// Default LASSO settings inside the online loop: a stronger relative λ
/// than the static default, since each estimate also predicts every
/// sensor's next report.
pub fn online_lasso() -> LassoConfig {
    LassoConfig {
        lambda: Lambda::Relative(0.1),
        ..LassoConfig::default()
    }
}

impl OnlineConfig {
    pub fn validate(&self, m: usize) -> Result<()> {
        if self.low_rate_denominator == 0 {
            return Err(invalid("low_rate_denominator must be at least 1"));
        }
        if self.k == 0 || self.k > m {
            return Err(invalid(format!(
                "active-set size {} must lie in 1..={m}",
                self.k
            )));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(invalid("gamma must be nonnegative"));
        }
        if !(self.forgetting.is_finite() && self.forgetting >= 0.0) {
            return Err(invalid("forgetting factor must be nonnegative"));
        }
        if self.blocks == 0 {
            return Err(invalid("blocks must be at least 1"));
        }
        self.lasso.validate()
    }
}

/// The true power vector for blocks `start..end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSegment {
    pub start: usize,
    pub end: usize,
    pub power: Vec<f64>,
}

/// Checks that `schedule` tiles `0..blocks` without gaps or overlaps and
/// returns the per-block segment index.
pub fn segment_index(schedule: &[TruthSegment], blocks: usize, n: usize) -> Result<Vec<usize>> {
    let mut next = 0;
    let mut index = Vec::with_capacity(blocks);
    for (i, seg) in schedule.iter().enumerate() {
        if seg.start != next || seg.end <= seg.start {
            return Err(invalid(format!(
                "truth schedule segment {i} covers {}..{} but block {next} is next",
                seg.start, seg.end
            )));
        }
        if seg.power.len() != n {
            return Err(invalid(format!("truth segment {i} has the wrong length")));
        }
        index.extend(std::iter::repeat_n(i, seg.end - seg.start));
        next = seg.end;
    }
    if next < blocks {
        return Err(invalid(format!(
            "truth schedule stops at block {next} of {blocks}"
        )));
    }
    index.truncate(blocks);
    Ok(index)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeBlockRecord {
    pub t: u64,
    pub active_set: Vec<usize>,
    pub estimate: Vec<f64>,
    pub reliability_snapshot: Vec<f64>,
    pub sampled_low_rate: Vec<usize>,
}

/// Purpose tags for the per-block random streams.
pub const NOISE_STREAM: &str = "online-noise";
pub const SELECTION_STREAM: &str = "online-selection";

/// Runs the two-rate sensing loop.
///
/// Block 0 observes every sensor, picks the active set with greedy
/// E-optimal selection and fits the power vector. Each later block draws
/// fresh measurements from the current truth, records reports from the
/// low-rate round-robin group and the previous active set, refreshes the
/// reliabilities against the previous estimate, re-selects the active set
/// and re-fits using only the active sensors' reports.
///
/// Noise for block `t` comes from `derive_seed(cfg.seed, 0, t, NOISE_STREAM)`,
/// so runs that differ only in `gamma` see identical measurements.
pub fn run_online(
    sc: &Scenario,
    truth_schedule: &[TruthSegment],
    cfg: &OnlineConfig,
) -> Result<Vec<TimeBlockRecord>> {
    let a = &sc.gain;
    let m = a.nrows();
    cfg.validate(m)?;
    let segments = segment_index(truth_schedule, cfg.blocks, a.ncols())?;
    let selection_seed = derive_seed(cfg.seed, 0, 0, SELECTION_STREAM);
    let noise_seed = |t: u64| derive_seed(cfg.seed, 0, t, NOISE_STREAM);

    let truth0 = &truth_schedule[segments[0]].power;
    let y0 = measure(a, truth0, sc.noise_std, noise_seed(0)).values;
    let mut active = greedy_eoptimal(a, cfg.k, None, selection_seed)?.selected;
    let mut x = irls_lasso(a, &y0, &active, &cfg.lasso)?.estimate;
    let mut state = update_reliability(&ReliabilityState::fresh(&y0, 0, cfg.forgetting), 0, a, &x);

    let mut records = Vec::with_capacity(cfg.blocks);
    records.push(TimeBlockRecord {
        t: 0,
        active_set: active.clone(),
        estimate: x.clone(),
        reliability_snapshot: state.r.clone(),
        sampled_low_rate: (0..m).collect(),
    });

    for t in 1..cfg.blocks as u64 {
        let truth = &truth_schedule[segments[t as usize]].power;
        let y = measure(a, truth, sc.noise_std, noise_seed(t)).values;

        let low_rate = low_rate_schedule(m, cfg.low_rate_denominator, t);
        for &s in low_rate.iter().chain(&active) {
            state.observe(s, t, y[s]);
        }
        state = update_reliability(&state, t, a, &x);

        active =
            reliable_greedy_select(a, &state.u, cfg.k, cfg.gamma, None, selection_seed)?.selected;
        // Newly activated sensors report at the high rate from this block on.
        for &s in &active {
            state.observe(s, t, y[s]);
        }
        x = irls_lasso(a, &y, &active, &cfg.lasso)?.estimate;

        records.push(TimeBlockRecord {
            t,
            active_set: active.clone(),
            estimate: x.clone(),
            reliability_snapshot: state.r.clone(),
            sampled_low_rate: low_rate,
        });
    }
    Ok(records)
}

pub fn write_jsonl<W: std::io::Write>(records: &[TimeBlockRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| crate::Error::Io {
            path: "<trace>".into(),
            source: e,
        })?;
    }
    Ok(())
}
