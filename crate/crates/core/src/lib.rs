//! Frontier-based exploration on occupancy grids: simulated worlds and
//! sensing, shortest-path navigation, and three frontier selection rules
//! (nearest frontier, information gain, distance advantage).

pub mod episode;
pub mod frontier;
pub mod grid;
pub mod harness;
pub mod mapping;
pub mod nav;
pub mod planners;
pub mod predictor;
pub mod world;

pub use frontier::{detect_frontiers, window_filter, FrontierSet, Window};
pub use grid::{CellIndex, Dims};
pub use mapping::{cast_scan, integrate_scan, CellState, KnownMap, MapDelta, Scan, Sensor};
pub use nav::{distance_field, extract_path, DistanceField, Path};
pub use predictor::{predict, PlanningMap, PredictionRange};
pub use world::{add_clutter, generate_env, parse_env, ClutterSpec, EnvKind, GroundTruth, Occupancy};
pub use episode::{run_episode, EpisodeConfig, EpisodeLog, Sample};
pub use planners::{Decision, GainMode, Method, PlannerConfig};
