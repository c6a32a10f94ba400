//! Closed-loop exploration runs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontier::{detect_frontiers, window_filter, FrontierSet};
use crate::grid::CellIndex;
use crate::mapping::{CellState, KnownMap, MappingError, Sensor, DEFAULT_MAX_RANGE, DEFAULT_RAY_COUNT};
use crate::nav::{clearance_field, extract_path, known_free_field_fast, NavError};
use crate::planners::{
    plan_distance_advantage, plan_nearest_frontier, Decision, InfoGainPlanner, Method, PlanError, PlannerConfig,
};
use crate::predictor::{predict, PlanningMap, PredictError};
use crate::world::GroundTruth;

/// Integrations allowed per grid cell before a run is declared stuck.
pub const STEP_BUDGET_PER_CELL: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub planner: PlannerConfig,
    pub ray_count: usize,
    pub max_range: f64,
    /// Check the whole map against the world after every scan.
    pub verify: bool,
}

impl EpisodeConfig {
    pub fn new(planner: PlannerConfig) -> Self {
        Self {
            planner,
            ray_count: DEFAULT_RAY_COUNT,
            max_range: DEFAULT_MAX_RANGE,
            verify: false,
        }
    }

    pub fn verified(mut self) -> Self {
        self.verify = true;
        self
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EpisodeError {
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Nav(#[from] NavError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error("start cell {0} is not free")]
    StartBlocked(CellIndex),
    #[error("planned path enters occupied cell {0}")]
    Collision(CellIndex),
    #[error("planner chose the robot's own cell {0}")]
    NoProgress(CellIndex),
    #[error("map contradicts the world at {0} cells")]
    Contradiction(usize),
    #[error("no termination after {0} scans")]
    NonTermination(usize),
    #[error("episode log has no samples")]
    EmptyLog,
}

/// A planner decision and the number of scans taken before it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub step: usize,
    #[serde(flatten)]
    pub decision: Decision,
}

/// Progress after one scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Meters travelled so far.
    pub distance_m: f64,
    /// Known cells.
    pub coverage_cells: usize,
    /// Frontier cells on the map after the scan.
    pub frontier_cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub config: EpisodeConfig,
    pub start: CellIndex,
    pub seed: u64,
    pub samples: Vec<Sample>,
    pub decisions: Vec<DecisionRecord>,
    /// Every cell occupied by the robot, in order.
    pub trajectory: Vec<CellIndex>,
    /// Total distance travelled.
    pub d_t: f64,
    pub final_coverage: usize,
    pub fallbacks: usize,
    /// Frontiers left when the run stopped; all unreachable.
    pub remaining_frontiers: usize,
    #[serde(skip)]
    pub final_map: Option<KnownMap>,
}

impl EpisodeLog {
    pub fn final_sample(&self) -> Sample {
        *self.samples.last().expect("an episode has at least the first scan")
    }
}

/// Runs one exploration from `start` until no reachable frontier remains.
///
/// `prediction_world` feeds the DA predictor; it defaults to `world`. `seed`
/// is recorded but the run itself is deterministic.
pub fn run_episode(
    world: &GroundTruth,
    start: CellIndex,
    config: &EpisodeConfig,
    prediction_world: Option<&GroundTruth>,
    seed: u64,
) -> Result<EpisodeLog, EpisodeError> {
    let sensor = Sensor::new(config.ray_count, config.max_range, world.cell_size())?;
    run_episode_with_sensor(world, start, config, prediction_world, seed, &sensor)
}

/// [`run_episode`] with a prebuilt sensor.
pub fn run_episode_with_sensor(
    world: &GroundTruth,
    start: CellIndex,
    config: &EpisodeConfig,
    prediction_world: Option<&GroundTruth>,
    seed: u64,
    sensor: &Sensor,
) -> Result<EpisodeLog, EpisodeError> {
    let dims = world.dims();
    let cs = world.cell_size();
    if start >= dims.len() || !world.is_free(start) {
        return Err(EpisodeError::StartBlocked(start));
    }
    let planner_cfg = config.planner;
    let prediction_world = prediction_world.unwrap_or(world);
    let budget = STEP_BUDGET_PER_CELL * dims.len();
    let mut ig = (planner_cfg.method == Method::Ig).then(|| InfoGainPlanner::new(dims, planner_cfg.gain_mode));

    let mut map = KnownMap::unknown(dims, cs);
    let mut pos = start;
    let mut travelled = 0.0;
    let mut scans = 0usize;
    let mut samples = Vec::new();
    let mut decisions = Vec::new();
    let mut trajectory = vec![start];
    let mut fallbacks = 0;

    let mut scan_at = |map: &mut KnownMap,
                       pos: CellIndex,
                       travelled: f64,
                       ig: &mut Option<InfoGainPlanner>,
                       samples: &mut Vec<Sample>|
     -> Result<(bool, FrontierSet), EpisodeError> {
        let scan = sensor.cast(world, pos)?;
        let delta = sensor.integrate(map, &scan, world)?;
        scans += 1;
        if scans > budget {
            return Err(EpisodeError::NonTermination(scans));
        }
        if config.verify {
            let bad = map.contradictions(world).len();
            if bad > 0 {
                return Err(EpisodeError::Contradiction(bad));
            }
        }
        if let Some(ig) = ig {
            ig.cache.observe(&delta, sensor);
        }
        let frontiers = detect_frontiers(map);
        samples.push(Sample {
            distance_m: travelled,
            coverage_cells: map.known_count(),
            frontier_cells: frontiers.len(),
        });
        Ok((!delta.is_empty(), frontiers))
    };

    let (_, mut frontiers) = scan_at(&mut map, pos, travelled, &mut ig, &mut samples)?;
    loop {
        let known_field = known_free_field_fast(&map, pos)?;
        if !frontiers.cells.iter().any(|&f| known_field.is_reachable(f)) {
            break;
        }
        let clearance = clearance_field(&map);
        let decision = match planner_cfg.method {
            Method::Nf => plan_nearest_frontier(&known_field, &frontiers)?,
            Method::Ig => ig.as_mut().expect("IG planner").plan(
                &map,
                world,
                sensor,
                &known_field,
                &clearance,
                &frontiers,
                planner_cfg.lambda,
            )?,
            Method::Da => {
                let (inside, outside) = window_filter(&frontiers, dims, cs, pos, planner_cfg.window_m);
                let planning = if planner_cfg.c_p.is_none() {
                    PlanningMap::known_only(
                        &map,
                        crate::frontier::Window::new(dims, cs, pos, planner_cfg.window_m),
                    )
                } else {
                    predict(&map, &frontiers, prediction_world, pos, planner_cfg.window_m, planner_cfg.c_p)?
                };
                plan_distance_advantage(&planning, pos, &inside, &outside, &known_field)?.0
            }
        };
        if decision.target == pos {
            return Err(EpisodeError::NoProgress(pos));
        }
        fallbacks += decision.used_fallback as usize;
        decisions.push(DecisionRecord {
            step: samples.len(),
            decision,
        });
        let path = extract_path(&known_field, decision.target, &clearance)?;
        for w in path.cells.windows(2) {
            let next = w[1];
            if !world.is_free(next) {
                return Err(EpisodeError::Collision(next));
            }
            travelled += crate::nav::Path::metric_length(dims, cs, w);
            pos = next;
            trajectory.push(pos);
            let (changed, f) = scan_at(&mut map, pos, travelled, &mut ig, &mut samples)?;
            frontiers = f;
            if changed {
                break;
            }
        }
    }
    let remaining_frontiers = frontiers.len();
    Ok(EpisodeLog {
        config: *config,
        start,
        seed,
        samples,
        decisions,
        trajectory,
        d_t: travelled,
        final_coverage: map.known_count(),
        fallbacks,
        remaining_frontiers,
        final_map: Some(map),
    })
}

/// The sample in effect after `distance` meters: the last one recorded at
/// or before it, or an empty sample before the first.
pub fn sample_at(samples: &[Sample], distance: f64) -> Sample {
    let k = samples.partition_point(|s| s.distance_m <= distance);
    match k {
        0 => Sample {
            distance_m: distance,
            coverage_cells: 0,
            frontier_cells: 0,
        },
        _ => Sample {
            distance_m: distance,
            ..samples[k - 1]
        },
    }
}

/// Coverage and frontier size on the grid `0, step, 2*step, ...` up to the
/// final distance (plus one step when it is not on the grid), carrying the
/// last observation forward.
pub fn metrics_resample(samples: &[Sample], step: f64) -> Result<Vec<Sample>, EpisodeError> {
    assert!(step > 0.0, "resampling step must be positive");
    let last = samples.last().ok_or(EpisodeError::EmptyLog)?;
    let n = (last.distance_m / step).ceil() as usize;
    Ok((0..=n).map(|i| sample_at(samples, i as f64 * step)).collect())
}

/// Cells a complete exploration from `start` can know: every free cell
/// reachable from it, and the occupied cells bordering those (any of which
/// may stay unobserved).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageCeiling {
    pub reachable_free: Vec<bool>,
    pub shell: Vec<bool>,
}

impl CoverageCeiling {
    pub fn new(world: &GroundTruth, start: CellIndex) -> Self {
        let dims = world.dims();
        let reachable_free = crate::grid::flood_fill(dims, &|c| world.is_free(c), &[start]);
        let mut shell = vec![false; dims.len()];
        for c in (0..dims.len()).filter(|&c| reachable_free[c]) {
            let (x, y) = dims.coords(c);
            for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    if let Some(n) = dims.checked_index(x as i64 + dx, y as i64 + dy) {
                        if !world.is_free(n) {
                            shell[n] = true;
                        }
                    }
                }
            }
        }
        Self { reachable_free, shell }
    }

    pub fn free_count(&self) -> usize {
        self.reachable_free.iter().filter(|&&b| b).count()
    }

    /// Whether `map` is a complete exploration: its free cells are exactly
    /// the reachable ones and its occupied cells lie in the shell. Returns
    /// the expected coverage (reachable free plus observed shell) on success.
    pub fn check(&self, map: &KnownMap) -> Result<usize, String> {
        let mut shell_seen = 0;
        for c in 0..map.dims().len() {
            match map.get(c) {
                CellState::Free if !self.reachable_free[c] => return Err(format!("cell {c} free but unreachable")),
                CellState::Unknown | CellState::Occupied if self.reachable_free[c] => {
                    return Err(format!("reachable free cell {c} is {:?}", map.get(c)))
                }
                CellState::Occupied if !self.shell[c] => return Err(format!("occupied cell {c} outside the shell")),
                CellState::Occupied => shell_seen += 1,
                _ => {}
            }
        }
        Ok(self.free_count() + shell_seen)
    }
}
