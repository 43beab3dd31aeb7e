//! Experiment drivers writing to disk.

use std::fs;
use std::path::Path;

use sensel_core::dynamic::online_lasso;
use sensel_core::dynamic::OnlineConfig;
use sensel_core::experiment::{
    run_diag, run_dynamic_experiment, run_oracle_checks, run_static_sweep, write_oracle_rows,
    DynamicParams, ExperimentConfig, KValues, ScenarioParams, StaticMethod, TruthScheduleConfig,
};
use sensel_core::Error;

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        scenario: ScenarioParams {
            side_count: 3,
            area_extent: 10.0,
            sensor_count: 30,
            sparsity: 2,
            snr_db: Some(20.0),
        },
        methods: vec![
            StaticMethod::EOptimal,
            StaticMethod::Random,
            StaticMethod::DOptimal,
        ],
        k_values: KValues::List(vec![4, 8]),
        trials: 3,
        dynamic: Some(DynamicParams {
            online: OnlineConfig {
                k: 4,
                low_rate_denominator: 6,
                gamma: 0.7,
                blocks: 20,
                forgetting: 0.1,
                lasso: online_lasso(),
                seed: 0,
            },
            schedule: TruthScheduleConfig {
                transitions: vec![7, 14],
                states: None,
            },
            gammas: vec![0.7],
            post_transition_window: 5,
            raster_blocks: vec![0, 19],
            raster_resolution: 8,
        }),
        seed: 42,
        ..Default::default()
    }
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn static_csv_schema_and_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config();
    run_static_sweep(&cfg).unwrap().write(dir.path()).unwrap();
    let trials = read(dir.path(), "static_trials.csv");
    let mut lines = trials.lines();
    assert_eq!(
        lines.next().unwrap(),
        "method,k,trial,success,normalized_error,spurious_power,wall_ms"
    );
    assert_eq!(lines.count(), 3 * 2 * 3);
    assert!(trials.lines().nth(1).unwrap().starts_with("e-optimal,4,0,"));
    let summary = read(dir.path(), "static_summary.csv");
    assert_eq!(
        summary.lines().next().unwrap(),
        "method,k,trials,success_rate,mean_normalized_error,mean_spurious_power"
    );

    let again = tempfile::tempdir().unwrap();
    run_static_sweep(&cfg).unwrap().write(again.path()).unwrap();
    assert_eq!(trials, read(again.path(), "static_trials.csv"));
    assert_eq!(summary, read(again.path(), "static_summary.csv"));
}

#[test]
fn dynamic_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let out = run_dynamic_experiment(&cfg).unwrap();
    out.write(dir.path()).unwrap();

    let trace = read(dir.path(), "traces/gamma-0.7_trial-1.jsonl");
    assert_eq!(trace.lines().count(), 20);
    let first: serde_json::Value = serde_json::from_str(trace.lines().next().unwrap()).unwrap();
    assert_eq!(first["t"], 0);
    assert_eq!(first["active_set"].as_array().unwrap().len(), 4);

    let blocks = read(dir.path(), "dynamic_blocks.csv");
    assert_eq!(
        blocks.lines().next().unwrap(),
        "gamma,trial,t,state,transition,normalized_error,mean_reliability,spurious_power,active_set"
    );
    assert_eq!(blocks.lines().count(), 1 + 2 * 3 * 20);
    assert_eq!(
        blocks.lines().filter(|l| l.contains(",true,")).count(),
        2 * 3 * 2
    );

    let pgm = read(dir.path(), "maps/gamma-0_t-19.pgm");
    assert!(pgm.starts_with("P2\n8 8\n255\n"));
    assert_eq!(pgm.lines().count(), 3 + 8);
    let json: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "maps/gamma-0.7_t-0.json")).unwrap();
    assert_eq!(json["width"], 8);

    let summary = read(dir.path(), "dynamic_summary.csv");
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn config_file_round_trip_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    let cfg = small_config();
    fs::write(&path, cfg.to_json_pretty().unwrap()).unwrap();
    assert_eq!(ExperimentConfig::load(&path).unwrap(), cfg);
    assert!(matches!(
        ExperimentConfig::load(&dir.path().join("missing.json")),
        Err(Error::Io { .. })
    ));
    let bad = cfg
        .to_json_pretty()
        .unwrap()
        .replace("\"d-optimal\"", "\"a-optimal\"");
    let err = ExperimentConfig::from_json(&bad).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert!(err.to_string().contains("oracle"));
}

#[test]
fn diag_and_oracle_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.scenario.sensor_count = 9;
    cfg.k_values = KValues::List(vec![2, 3]);
    run_diag(&cfg).unwrap().write(dir.path()).unwrap();
    let diag: serde_json::Value = serde_json::from_str(&read(dir.path(), "diag.json")).unwrap();
    assert_eq!(diag["sensor_count"], 9);
    assert_eq!(diag["rip"].as_array().unwrap().len(), 3);

    let rows = run_oracle_checks(&cfg).unwrap();
    write_oracle_rows(&rows, dir.path()).unwrap();
    assert!(rows
        .iter()
        .all(|r| r.greedy_within_oracle && r.volume_bound_holds));
    assert_eq!(
        read(dir.path(), "oracle_checks.csv").lines().count(),
        1 + 2 * 3
    );
}
