use explore_core::harness::{
    self, derive_seed, mean_std, percentile, run_experiment, ClutterPlan, EnvSource, ExperimentSpec, HarnessError,
    Sweep, CSV_HEADER,
};
use explore_core::planners::GainMode;
use explore_core::{EnvKind, PlannerConfig, PredictionRange};

fn spec(kind: EnvKind, side: usize, starts: usize, methods: Vec<PlannerConfig>) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(
        EnvSource::Generated {
            kind,
            width: side,
            height: side,
            seed: 5,
        },
        methods,
    );
    s.starts = starts;
    s.master_seed = 5;
    s
}

fn three() -> Vec<PlannerConfig> {
    vec![
        PlannerConfig::nf(),
        PlannerConfig::ig(1.0, GainMode::Naive),
        PlannerConfig::da(PredictionRange::Unlimited),
    ]
}

fn csv_bytes(r: &harness::ExperimentResult) -> Vec<u8> {
    let mut buf = Vec::new();
    harness::write_runs_csv(&r.records, &mut buf).unwrap();
    buf
}

#[test]
fn output_does_not_depend_on_parallelism() {
    let s = spec(EnvKind::Office, 56, 3, three());
    let a = run_experiment(&s, 1).unwrap();
    let b = run_experiment(&s, 3).unwrap();
    assert_eq!(csv_bytes(&a), csv_bytes(&b));
    assert_eq!(serde_json::to_string(&a.summary).unwrap(), serde_json::to_string(&b.summary).unwrap());
}

#[test]
fn summary_rows_follow_methods_and_pair_with_nf() {
    let r = run_experiment(&spec(EnvKind::Maze, 100, 2, three()), 1).unwrap();
    let labels: Vec<_> = r.summary.rows.iter().map(|x| x.method.as_str()).collect();
    assert_eq!(labels, ["NF", "IG/NAIVE/lambda=1", "DA/cp=inf/window=30"]);
    let nf = r.summary.row("NF", "none").unwrap();
    assert_eq!((nf.delta_nf_mean_m, nf.delta_nf_std_m), (Some(0.0), Some(0.0)));
    for row in &r.summary.rows {
        assert_eq!(row.n, 2);
        let d = r.d_t(&row.method, "none");
        let (m, s) = mean_std(&d);
        assert_eq!((row.mean_dt_m, row.std_dt_m), (m, s));
        let base = r.d_t("NF", "none");
        let deltas: Vec<f64> = d.iter().zip(&base).map(|(a, b)| a - b).collect();
        assert_eq!(row.delta_nf_mean_m, Some(mean_std(&deltas).0));
    }
    let curve = &r.summary.curves[0];
    let longest = r.d_t("NF", "none").into_iter().fold(0.0, f64::max);
    assert_eq!(curve.coverage_mean.len(), (longest / curve.step_m).ceil() as usize + 1);
    assert!(curve.coverage_p10.iter().zip(&curve.coverage_p90).all(|(a, b)| a <= b));

    let only_nf = run_experiment(&spec(EnvKind::Maze, 100, 2, vec![PlannerConfig::nf()]), 1).unwrap();
    assert_eq!(only_nf.summary.rows.len(), 1);
    assert_eq!(only_nf.summary.rows[0].delta_nf_mean_m, Some(0.0));
}

#[test]
fn zero_weight_rows_agree_across_gain_modes() {
    let r = harness::sweep_lambda(&spec(EnvKind::Cave, 56, 2, vec![PlannerConfig::nf()]), &[0.0, 2.0], &[
        GainMode::Naive,
        GainMode::True,
    ], 1)
    .unwrap();
    let naive = r.d_t("IG/NAIVE/lambda=0", "lambda=0");
    assert_eq!(naive, r.d_t("IG/TRUE/lambda=0", "lambda=0"));
    assert_eq!(naive, r.d_t("NF", "lambda=0"));
    assert_eq!(r.summary.rows.len(), 6);
}

#[test]
fn prediction_range_leaves_nf_alone() {
    let base = spec(EnvKind::Office, 56, 2, vec![PlannerConfig::nf(), PlannerConfig::da(PredictionRange::Cells(0))]);
    let r = harness::sweep_cp(&base, &[PredictionRange::Cells(0), PredictionRange::Unlimited], 1).unwrap();
    assert_eq!(r.d_t("NF", "cp=0"), r.d_t("NF", "cp=inf"));
    assert_eq!(r.d_t("DA/cp=0/window=30", "cp=0").len(), 2);
    assert_eq!(r.d_t("DA/cp=inf/window=30", "cp=inf").len(), 2);
}

#[test]
fn clean_condition_matches_a_plain_run() {
    let base = spec(EnvKind::Office, 56, 2, three());
    let plain = run_experiment(&base, 1).unwrap();
    let r = harness::clutter_matrix(&base, ClutterPlan { count: 12, size: 1.0 }, 1).unwrap();
    for row in &plain.summary.rows {
        assert_eq!(r.d_t(&row.method, "clean/clean"), plain.d_t(&row.method, "none"));
        assert_eq!(r.d_t(&row.method, "noise/clean").len(), 2);
    }
    // NF never looks at predictions.
    assert_eq!(r.d_t("NF", "noise/clean"), r.d_t("NF", "noise/noise"));
}

#[test]
fn outputs_round_trip() {
    let r = run_experiment(&spec(EnvKind::Maze, 40, 2, three()), 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    harness::write_outputs(&r, dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    let rows: usize = r.records.iter().map(|x| x.log.samples.len()).sum();
    assert_eq!(lines.count(), rows);
    let first = csv.lines().nth(1).unwrap();
    assert!(first.starts_with("1,none/NF/start=0,"), "{first}");

    assert_eq!(harness::read_summary(&dir.path().join("summary.json")).unwrap(), r.summary);
    let json = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(json.contains("\"mean_dT_m\"") && json.contains("\"delta_nf_std_m\""));
    let episodes = std::fs::read_to_string(dir.path().join("episodes.jsonl")).unwrap();
    assert_eq!(episodes.lines().count(), r.records.len());
    for line in episodes.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["wall_time_s"].as_f64().unwrap() >= 0.0);
    }
    assert!(harness::format_report(&r.summary).lines().count() == 4);
}

#[test]
fn seeds_are_stable_and_separated() {
    assert_eq!(derive_seed(1, &["NF", "0"]), derive_seed(1, &["NF", "0"]));
    assert_ne!(derive_seed(1, &["NF", "0"]), derive_seed(2, &["NF", "0"]));
    assert_ne!(derive_seed(1, &["ab", "c"]), derive_seed(1, &["a", "bc"]));
    let (e, p) = harness::clutter_seeds(3, 0);
    assert_ne!(e, p);
    assert_ne!(harness::clutter_seeds(3, 1), (e, p));
}

#[test]
fn statistics_match_hand_values() {
    let (m, s) = mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
    assert_eq!(m, 5.0);
    assert!((s - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
    assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
    let v = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
    assert!((percentile(&v, 0.1) - 1.9).abs() < 1e-12);
    assert!((percentile(&v, 0.9) - 9.1).abs() < 1e-12);
    assert_eq!(percentile(&v, 0.0), 1.0);
    assert_eq!(percentile(&[4.0], 0.9), 4.0);
}

#[test]
fn invalid_specs_are_rejected() {
    let mut s = spec(EnvKind::Maze, 40, 0, three());
    assert!(matches!(run_experiment(&s, 1), Err(HarnessError::SpecInvalid(_))));
    s.starts = 50;
    assert!(matches!(run_experiment(&s, 1), Err(HarnessError::SpecInvalid(_))));
    s.starts = 1;
    s.sweep = Sweep::Lambda(vec![]);
    assert!(matches!(run_experiment(&s, 1), Err(HarnessError::SpecInvalid(_))));
    s.sweep = Sweep::None;
    s.methods.clear();
    assert!(matches!(run_experiment(&s, 1), Err(HarnessError::SpecInvalid(_))));
    let missing = ExperimentSpec::new(EnvSource::File("/nonexistent/map.txt".into()), three());
    assert!(matches!(run_experiment(&missing, 1), Err(HarnessError::Io { .. })));
}

#[test]
fn config_files_parse() {
    let text = "# sweep\nmethod = NF\nmethod=DA\n\nclutter_density = 0.1  # dense\n";
    let entries = harness::parse_config(text).unwrap();
    assert_eq!(
        entries,
        [("method", "NF"), ("method", "DA"), ("clutter-density", "0.1")].map(|(a, b)| (a.to_string(), b.to_string()))
    );
    assert!(matches!(harness::parse_config("oops"), Err(HarnessError::Config { line: 1, .. })));
}
