//! Batch experiments: paired multi-start runs, parameter sweeps, clutter
//! mismatch, aggregation and CSV/JSON output.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::episode::{metrics_resample, run_episode_with_sensor, EpisodeConfig, EpisodeError, EpisodeLog};
use crate::mapping::{MappingError, Sensor};
use crate::planners::{GainMode, Method, PlannerConfig};
use crate::predictor::PredictionRange;
use crate::world::{add_clutter, generate_env, parse_env, ClutterSpec, EnvKind, GroundTruth, WorldError};

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 11] = [
    "schema_version",
    "run_id",
    "seed",
    "method",
    "lambda",
    "gain_mode",
    "cp",
    "start_idx",
    "d_m",
    "coverage_cells",
    "frontier_cells",
];

/// Distance step of the aggregated curves, meters.
pub const CURVE_STEP_M: f64 = 1.0;

pub const DEFAULT_LAMBDAS: [f64; 7] = [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    SpecInvalid(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Sensor(#[from] MappingError),
    #[error("episode {run_id} (seed {seed}, start {start_idx}) failed: {source}")]
    EpisodeFailed {
        run_id: String,
        seed: u64,
        start_idx: usize,
        source: EpisodeError,
    },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EnvSource {
    Generated {
        kind: EnvKind,
        width: usize,
        height: usize,
        seed: u64,
    },
    File(PathBuf),
}

impl EnvSource {
    pub fn load(&self) -> Result<GroundTruth, HarnessError> {
        match self {
            EnvSource::Generated {
                kind,
                width,
                height,
                seed,
            } => Ok(generate_env(*kind, *width, *height, *seed)?),
            EnvSource::File(path) => {
                let text = fs::read_to_string(path).map_err(io_err(path))?;
                Ok(parse_env(&text)?)
            }
        }
    }
}

/// Clutter conditions: environment and prediction world each clean or
/// cluttered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    CleanClean,
    NoiseClean,
    NoiseNoise,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::CleanClean, Condition::NoiseClean, Condition::NoiseNoise];

    pub fn label(self) -> &'static str {
        match self {
            Condition::CleanClean => "clean/clean",
            Condition::NoiseClean => "noise/clean",
            Condition::NoiseNoise => "noise/noise",
        }
    }
}

/// Triangle count and size for the clutter experiment. Seeds are derived
/// per start from the master seed, independently for the environment and
/// the prediction world.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClutterPlan {
    pub count: usize,
    pub size: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Sweep {
    None,
    /// Overrides every method's gain weight.
    Lambda(Vec<f64>),
    /// Overrides every method's prediction range.
    Cp(Vec<PredictionRange>),
    Clutter(ClutterPlan),
}

/// One point on a sweep axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepPoint {
    None,
    Lambda(f64),
    Cp(PredictionRange),
    Clutter(Condition),
}

impl fmt::Display for SweepPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepPoint::None => f.write_str("none"),
            SweepPoint::Lambda(l) => write!(f, "lambda={l}"),
            SweepPoint::Cp(c) => write!(f, "cp={c}"),
            SweepPoint::Clutter(c) => f.write_str(c.label()),
        }
    }
}

impl Sweep {
    pub fn points(&self) -> Vec<SweepPoint> {
        match self {
            Sweep::None => vec![SweepPoint::None],
            Sweep::Lambda(ls) => ls.iter().map(|&l| SweepPoint::Lambda(l)).collect(),
            Sweep::Cp(cs) => cs.iter().map(|&c| SweepPoint::Cp(c)).collect(),
            Sweep::Clutter(_) => Condition::ALL.iter().map(|&c| SweepPoint::Clutter(c)).collect(),
        }
    }
}

impl SweepPoint {
    fn apply(self, mut cfg: PlannerConfig) -> PlannerConfig {
        match self {
            SweepPoint::Lambda(l) => cfg.lambda = l,
            SweepPoint::Cp(c) => cfg.c_p = c,
            SweepPoint::None | SweepPoint::Clutter(_) => {}
        }
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub env: EnvSource,
    pub methods: Vec<PlannerConfig>,
    /// Number of start cells, taken in order from the world's start list.
    pub starts: usize,
    pub sweep: Sweep,
    pub master_seed: u64,
}

impl ExperimentSpec {
    pub fn new(env: EnvSource, methods: Vec<PlannerConfig>) -> Self {
        Self {
            env,
            methods,
            starts: 10,
            sweep: Sweep::None,
            master_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.starts == 0 {
            return Err(HarnessError::SpecInvalid("starts must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(HarnessError::SpecInvalid("no methods".into()));
        }
        for m in &self.methods {
            if !(m.window_m > 0.0 && m.window_m.is_finite()) {
                return Err(HarnessError::SpecInvalid(format!("window {} m", m.window_m)));
            }
            if !m.lambda.is_finite() {
                return Err(HarnessError::SpecInvalid(format!("lambda {}", m.lambda)));
            }
        }
        match &self.sweep {
            Sweep::Lambda(v) if v.is_empty() || v.iter().any(|l| !l.is_finite()) => {
                Err(HarnessError::SpecInvalid("lambda sweep needs finite values".into()))
            }
            Sweep::Cp(v) if v.is_empty() => Err(HarnessError::SpecInvalid("empty prediction range sweep".into())),
            Sweep::Clutter(p) if !(p.size > 0.0) => {
                Err(HarnessError::SpecInvalid(format!("clutter size {}", p.size)))
            }
            _ => Ok(()),
        }
    }
}

/// Short stable name for a planner configuration.
pub fn method_label(cfg: &PlannerConfig) -> String {
    match cfg.method {
        Method::Nf => "NF".into(),
        Method::Ig => format!("IG/{}/lambda={}", cfg.gain_mode, cfg.lambda),
        Method::Da => format!("DA/cp={}/window={}", cfg.c_p, cfg.window_m),
    }
}

/// Child seed from the master seed and run coordinates.
pub fn derive_seed(master: u64, parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("8 bytes"))
}

pub fn clutter_seeds(master: u64, start_idx: usize) -> (u64, u64) {
    let s = start_idx.to_string();
    (
        derive_seed(master, &["clutter", "environment", &s]),
        derive_seed(master, &["clutter", "prediction", &s]),
    )
}

/// One finished episode.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub seed: u64,
    pub method: String,
    pub config: PlannerConfig,
    pub sweep: String,
    pub start_idx: usize,
    pub log: EpisodeLog,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub sweep: String,
    #[serde(rename = "mean_dT_m")]
    pub mean_dt_m: f64,
    #[serde(rename = "std_dT_m")]
    pub std_dt_m: f64,
    pub delta_nf_mean_m: Option<f64>,
    pub delta_nf_std_m: Option<f64>,
    pub n: usize,
}

/// Mean curve with a 10th to 90th percentile band across runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveBand {
    pub method: String,
    pub sweep: String,
    pub step_m: f64,
    pub coverage_mean: Vec<f64>,
    pub coverage_p10: Vec<f64>,
    pub coverage_p90: Vec<f64>,
    pub frontier_mean: Vec<f64>,
    pub frontier_p10: Vec<f64>,
    pub frontier_p90: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub rows: Vec<SummaryRow>,
    pub curves: Vec<CurveBand>,
}

impl Summary {
    pub fn row(&self, method: &str, sweep: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.method == method && r.sweep == sweep)
    }
}

pub struct ExperimentResult {
    pub records: Vec<RunRecord>,
    pub summary: Summary,
}

impl ExperimentResult {
    /// d_T per start for one (method, sweep) cell, in start order.
    pub fn d_t(&self, method: &str, sweep: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.method == method && r.sweep == sweep)
            .map(|r| r.log.d_t)
            .collect()
    }

    pub fn logs(&self, method: &str, sweep: &str) -> Vec<&EpisodeLog> {
        self.records
            .iter()
            .filter(|r| r.method == method && r.sweep == sweep)
            .map(|r| &r.log)
            .collect()
    }
}

struct Task {
    method_idx: usize,
    point: SweepPoint,
    start_idx: usize,
}

/// Runs every (method, sweep point, start) episode of `spec` on `jobs`
/// worker threads. Results are gathered in a fixed order, so the output
/// does not depend on `jobs`.
pub fn run_experiment(spec: &ExperimentSpec, jobs: usize) -> Result<ExperimentResult, HarnessError> {
    spec.validate()?;
    let world = spec.env.load()?;
    if world.starts().len() < spec.starts {
        return Err(HarnessError::SpecInvalid(format!(
            "{} starts requested, world has {}",
            spec.starts,
            world.starts().len()
        )));
    }
    let points = spec.sweep.points();
    // Cluttered worlds per start: (environment, prediction).
    let cluttered: Vec<Option<(GroundTruth, GroundTruth)>> = match &spec.sweep {
        Sweep::Clutter(plan) => (0..spec.starts)
            .map(|i| {
                let (env_seed, pred_seed) = clutter_seeds(spec.master_seed, i);
                let spec_for = |seed| ClutterSpec {
                    count: plan.count,
                    size: plan.size,
                    seed,
                };
                Ok(Some((
                    add_clutter(&world, &spec_for(env_seed))?,
                    add_clutter(&world, &spec_for(pred_seed))?,
                )))
            })
            .collect::<Result<_, HarnessError>>()?,
        _ => vec![None; spec.starts],
    };
    let sensor = Sensor::default_for(world.cell_size());
    let mut tasks = Vec::new();
    for &point in &points {
        for method_idx in 0..spec.methods.len() {
            for start_idx in 0..spec.starts {
                tasks.push(Task {
                    method_idx,
                    point,
                    start_idx,
                });
            }
        }
    }
    let run = |t: &Task| -> Result<RunRecord, HarnessError> {
        let cfg = t.point.apply(spec.methods[t.method_idx]);
        let method = method_label(&cfg);
        let sweep = t.point.to_string();
        let run_id = format!("{sweep}/{method}/start={}", t.start_idx);
        let seed = derive_seed(spec.master_seed, &[&method, &t.start_idx.to_string(), &sweep]);
        let (env, pred) = match (t.point, &cluttered[t.start_idx]) {
            (SweepPoint::Clutter(Condition::NoiseClean), Some((e, _))) => (e, &world),
            (SweepPoint::Clutter(Condition::NoiseNoise), Some((e, p))) => (e, p),
            _ => (&world, &world),
        };
        let start = world.starts()[t.start_idx];
        let clock = Instant::now();
        let log = run_episode_with_sensor(env, start, &EpisodeConfig::new(cfg), Some(pred), seed, &sensor).map_err(
            |source| HarnessError::EpisodeFailed {
                run_id: run_id.clone(),
                seed,
                start_idx: t.start_idx,
                source,
            },
        )?;
        Ok(RunRecord {
            run_id,
            seed,
            method,
            config: cfg,
            sweep,
            start_idx: t.start_idx,
            log,
            wall_time_s: clock.elapsed().as_secs_f64(),
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::SpecInvalid(format!("thread pool: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| tasks.par_iter().map(run).collect::<Result<_, _>>())?;
    let summary = summarize(&records);
    Ok(ExperimentResult { records, summary })
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Linear-interpolated percentile of sorted values, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Aggregates records into per-(method, sweep point) rows, in first
/// appearance order.
pub fn summarize(records: &[RunRecord]) -> Summary {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut groups: BTreeMap<(String, String), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.method.clone(), r.sweep.clone());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for key in &order {
        let runs = &groups[key];
        let d: Vec<f64> = runs.iter().map(|r| r.log.d_t).collect();
        let (mean, std) = mean_std(&d);
        let nf = groups.get(&("NF".to_string(), key.1.clone()));
        let (delta_nf_mean_m, delta_nf_std_m) = match nf {
            Some(nf) => {
                let by_start: BTreeMap<usize, f64> = nf.iter().map(|r| (r.start_idx, r.log.d_t)).collect();
                let deltas: Vec<f64> = runs
                    .iter()
                    .filter_map(|r| by_start.get(&r.start_idx).map(|b| r.log.d_t - b))
                    .collect();
                if deltas.is_empty() {
                    (None, None)
                } else {
                    let (m, s) = mean_std(&deltas);
                    (Some(m), Some(s))
                }
            }
            None => (None, None),
        };
        rows.push(SummaryRow {
            method: key.0.clone(),
            sweep: key.1.clone(),
            mean_dt_m: mean,
            std_dt_m: std,
            delta_nf_mean_m,
            delta_nf_std_m,
            n: runs.len(),
        });
        curves.push(curve_band(&key.0, &key.1, runs));
    }
    Summary {
        schema_version: SCHEMA_VERSION,
        rows,
        curves,
    }
}

fn curve_band(method: &str, sweep: &str, runs: &[&RunRecord]) -> CurveBand {
    let resampled: Vec<_> = runs
        .iter()
        .map(|r| metrics_resample(&r.log.samples, CURVE_STEP_M).expect("episodes record samples"))
        .collect();
    let len = resampled.iter().map(Vec::len).max().unwrap_or(0);
    let mut band = CurveBand {
        method: method.into(),
        sweep: sweep.into(),
        step_m: CURVE_STEP_M,
        coverage_mean: Vec::with_capacity(len),
        coverage_p10: Vec::with_capacity(len),
        coverage_p90: Vec::with_capacity(len),
        frontier_mean: Vec::with_capacity(len),
        frontier_p10: Vec::with_capacity(len),
        frontier_p90: Vec::with_capacity(len),
    };
    for i in 0..len {
        // Finished runs hold their last value.
        let at = |r: &Vec<crate::episode::Sample>| r[i.min(r.len() - 1)];
        let mut cov: Vec<f64> = resampled.iter().map(|r| at(r).coverage_cells as f64).collect();
        let mut fr: Vec<f64> = resampled.iter().map(|r| at(r).frontier_cells as f64).collect();
        cov.sort_by(f64::total_cmp);
        fr.sort_by(f64::total_cmp);
        band.coverage_mean.push(mean_std(&cov).0);
        band.coverage_p10.push(percentile(&cov, 0.1));
        band.coverage_p90.push(percentile(&cov, 0.9));
        band.frontier_mean.push(mean_std(&fr).0);
        band.frontier_p10.push(percentile(&fr, 0.1));
        band.frontier_p90.push(percentile(&fr, 0.9));
    }
    band
}

/// Raw per-sample rows for all records.
pub fn write_runs_csv<W: Write>(records: &[RunRecord], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let c = &r.config;
        for s in &r.log.samples {
            w.write_record([
                SCHEMA_VERSION.to_string(),
                r.run_id.clone(),
                r.seed.to_string(),
                c.method.to_string(),
                c.lambda.to_string(),
                c.gain_mode.to_string(),
                c.c_p.to_string(),
                r.start_idx.to_string(),
                s.distance_m.to_string(),
                s.coverage_cells.to_string(),
                s.frontier_cells.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| HarnessError::Csv(e.into()))?;
    Ok(())
}

/// Per-episode JSON line, including wall time.
#[derive(Serialize)]
struct EpisodeLine<'a> {
    schema_version: u32,
    run_id: &'a str,
    seed: u64,
    method: &'a str,
    sweep: &'a str,
    start_idx: usize,
    #[serde(rename = "dT_m")]
    d_t_m: f64,
    decisions: usize,
    fallbacks: usize,
    final_coverage: usize,
    wall_time_s: f64,
}

/// Writes `runs.csv`, `summary.json` and `episodes.jsonl` into `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv_path = dir.join("runs.csv");
    let f = fs::File::create(&csv_path).map_err(io_err(&csv_path))?;
    write_runs_csv(&result.records, std::io::BufWriter::new(f))?;
    let summary_path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&result.summary)?;
    fs::write(&summary_path, text + "\n").map_err(io_err(&summary_path))?;
    let ep_path = dir.join("episodes.jsonl");
    let mut lines = String::new();
    for r in &result.records {
        let line = EpisodeLine {
            schema_version: SCHEMA_VERSION,
            run_id: &r.run_id,
            seed: r.seed,
            method: &r.method,
            sweep: &r.sweep,
            start_idx: r.start_idx,
            d_t_m: r.log.d_t,
            decisions: r.log.decisions.len(),
            fallbacks: r.log.fallbacks,
            final_coverage: r.log.final_coverage,
            wall_time_s: r.wall_time_s,
        };
        lines.push_str(&serde_json::to_string(&line)?);
        lines.push('\n');
    }
    fs::write(&ep_path, lines).map_err(io_err(&ep_path))?;
    Ok(())
}

/// Reads a summary written by [`write_outputs`].
pub fn read_summary(path: &Path) -> Result<Summary, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let s: Summary = serde_json::from_str(&text)?;
    if s.schema_version != SCHEMA_VERSION {
        return Err(HarnessError::SpecInvalid(format!(
            "summary schema {} (expected {SCHEMA_VERSION})",
            s.schema_version
        )));
    }
    Ok(s)
}

/// Plain-text table of a summary.
pub fn format_report(summary: &Summary) -> String {
    let mut out = format!(
        "{:<32} {:<14} {:>10} {:>9} {:>10} {:>9} {:>3}\n",
        "method", "sweep", "mean_dT_m", "std", "dNF_mean", "dNF_std", "n"
    );
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.1}"));
    for r in &summary.rows {
        out.push_str(&format!(
            "{:<32} {:<14} {:>10.1} {:>9.1} {:>10} {:>9} {:>3}\n",
            r.method,
            r.sweep,
            r.mean_dt_m,
            r.std_dt_m,
            opt(r.delta_nf_mean_m),
            opt(r.delta_nf_std_m),
            r.n
        ));
    }
    out
}

/// Information gain at each weight, once per gain mode, plus any other
/// methods of `base`.
pub fn sweep_lambda(
    base: &ExperimentSpec,
    lambdas: &[f64],
    gain_modes: &[GainMode],
    jobs: usize,
) -> Result<ExperimentResult, HarnessError> {
    let mut spec = base.clone();
    spec.methods.retain(|m| m.method != Method::Ig);
    let window = base.methods.first().map_or(crate::planners::DEFAULT_WINDOW_M, |m| m.window_m);
    for &g in gain_modes {
        spec.methods.push(PlannerConfig::ig(0.0, g).with_window(window));
    }
    spec.sweep = Sweep::Lambda(lambdas.to_vec());
    run_experiment(&spec, jobs)
}

pub fn sweep_cp(base: &ExperimentSpec, cp_values: &[PredictionRange], jobs: usize) -> Result<ExperimentResult, HarnessError> {
    let mut spec = base.clone();
    spec.sweep = Sweep::Cp(cp_values.to_vec());
    run_experiment(&spec, jobs)
}

pub fn clutter_matrix(base: &ExperimentSpec, plan: ClutterPlan, jobs: usize) -> Result<ExperimentResult, HarnessError> {
    let mut spec = base.clone();
    spec.sweep = Sweep::Clutter(plan);
    run_experiment(&spec, jobs)
}

/// Flat `key = value` configuration. Blank lines and `#` comments are
/// skipped; keys may repeat.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, HarnessError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(HarnessError::Config {
                line: i + 1,
                msg: format!("expected key = value, got {line:?}"),
            });
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(HarnessError::Config {
                line: i + 1,
                msg: "empty key".into(),
            });
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std_uses_n_minus_one() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - 1.2909944487358056).abs() < 1e-12);
        assert_eq!(mean_std(&[7.0]), (7.0, 0.0));
    }

    #[test]
    fn percentiles_interpolate() {
        let v: Vec<f64> = (0..10).map(f64::from).collect();
        assert!((percentile(&v, 0.1) - 0.9).abs() < 1e-12);
        assert!((percentile(&v, 0.9) - 8.1).abs() < 1e-12);
        assert_eq!(percentile(&[3.0], 0.1), 3.0);
    }

    #[test]
    fn seeds_depend_on_every_part() {
        let a = derive_seed(1, &["NF", "0", "none"]);
        assert_eq!(a, derive_seed(1, &["NF", "0", "none"]));
        assert_ne!(a, derive_seed(2, &["NF", "0", "none"]));
        assert_ne!(a, derive_seed(1, &["NF", "1", "none"]));
        assert_ne!(derive_seed(1, &["ab", "c"]), derive_seed(1, &["a", "bc"]));
        let (e, p) = clutter_seeds(5, 0);
        assert_ne!(e, p);
    }

    #[test]
    fn config_lines() {
        let kv = parse_config("# c\nkind = office\n\nmethod=NF\nmethod = DA # inline\ngain_mode=TRUE\n").unwrap();
        assert_eq!(
            kv,
            vec![
                ("kind".to_string(), "office".to_string()),
                ("method".into(), "NF".into()),
                ("method".into(), "DA".into()),
                ("gain-mode".into(), "TRUE".into()),
            ]
        );
        assert!(matches!(parse_config("oops"), Err(HarnessError::Config { line: 1, .. })));
    }

    #[test]
    fn labels_are_stable() {
        assert_eq!(method_label(&PlannerConfig::nf()), "NF");
        assert_eq!(method_label(&PlannerConfig::ig(-2.0, GainMode::Naive)), "IG/NAIVE/lambda=-2");
        assert_eq!(
            method_label(&PlannerConfig::da(PredictionRange::Unlimited)),
            "DA/cp=inf/window=30"
        );
        assert_eq!(SweepPoint::Lambda(0.5).to_string(), "lambda=0.5");
    }
}
