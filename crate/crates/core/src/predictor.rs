//! Oracle map completion around the robot.
//!
//! The predictor reveals a source world's occupancy for unknown cells in
//! the local window that lie within a straight-line range of the nearest
//! frontier. The source may be the true world or a differently cluttered
//! one. Predicted cells never count as coverage; planners read them only.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::frontier::{FrontierSet, Window};
use crate::grid::CellIndex;
use crate::mapping::{CellState, KnownMap};
use crate::world::{GroundTruth, Occupancy};

#[derive(Debug, Error, PartialEq)]
pub enum PredictError {
    #[error("prediction world is {found:?}, map is {expected:?}")]
    DimensionMismatch {
        expected: crate::grid::Dims,
        found: crate::grid::Dims,
    },
}

/// Maximum straight-line prediction distance beyond a frontier, in cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PredictionRange {
    Cells(u32),
    Unlimited,
}

impl PredictionRange {
    pub fn is_none(&self) -> bool {
        *self == PredictionRange::Cells(0)
    }
}

impl fmt::Display for PredictionRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredictionRange::Cells(n) => write!(f, "{n}"),
            PredictionRange::Unlimited => f.write_str("inf"),
        }
    }
}

impl FromStr for PredictionRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "unlimited" | "∞" => Ok(PredictionRange::Unlimited),
            other => other
                .parse::<u32>()
                .map(PredictionRange::Cells)
                .map_err(|_| format!("invalid prediction range {s:?}")),
        }
    }
}

impl Serialize for PredictionRange {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PredictionRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Known map plus a prediction overlay.
#[derive(Clone, Debug)]
pub struct PlanningMap<'a> {
    base: &'a KnownMap,
    /// Predicted cells, sorted ascending.
    predicted: Vec<(CellIndex, Occupancy)>,
    /// Dense lookup; `Unknown` where nothing is predicted.
    overlay: Vec<CellState>,
    pub window: Window,
    pub range: PredictionRange,
}

impl<'a> PlanningMap<'a> {
    /// A planning map without predictions.
    pub fn known_only(base: &'a KnownMap, window: Window) -> Self {
        Self {
            base,
            predicted: Vec::new(),
            overlay: Vec::new(),
            window,
            range: PredictionRange::Cells(0),
        }
    }

    pub fn base(&self) -> &KnownMap {
        self.base
    }

    pub fn predicted(&self) -> &[(CellIndex, Occupancy)] {
        &self.predicted
    }

    /// Known state if known, else the prediction, else unknown.
    pub fn state(&self, cell: CellIndex) -> CellState {
        match self.base.get(cell) {
            CellState::Unknown if !self.overlay.is_empty() => self.overlay[cell],
            s => s,
        }
    }

    pub fn is_traversable(&self, cell: CellIndex) -> bool {
        self.state(cell) == CellState::Free
    }
}

/// Builds the overlay for the window around `center`.
pub fn predict<'a>(
    map: &'a KnownMap,
    frontiers: &FrontierSet,
    source_world: &GroundTruth,
    center: CellIndex,
    window_m: f64,
    range: PredictionRange,
) -> Result<PlanningMap<'a>, PredictError> {
    let dims = map.dims();
    if source_world.dims() != dims {
        return Err(PredictError::DimensionMismatch {
            expected: dims,
            found: source_world.dims(),
        });
    }
    let window = Window::new(dims, map.cell_size(), center, window_m);
    if range.is_none() || frontiers.is_empty() {
        return Ok(PlanningMap::known_only(map, window));
    }
    let (x0, y0, x1, y1) = window.bounds();
    let mut overlay = vec![CellState::Unknown; dims.len()];
    let predicted_state = |c: CellIndex| match source_world.get(c) {
        Occupancy::Free => CellState::Free,
        Occupancy::Occupied => CellState::Occupied,
    };
    match range {
        PredictionRange::Unlimited => {
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let c = dims.index(x, y);
                    if map.get(c) == CellState::Unknown {
                        overlay[c] = predicted_state(c);
                    }
                }
            }
        }
        PredictionRange::Cells(k) => {
            let k = k as i64;
            let disc: Vec<(i64, i64)> = (-k..=k)
                .flat_map(|dy| (-k..=k).map(move |dx| (dx, dy)))
                .filter(|&(dx, dy)| dx * dx + dy * dy <= k * k)
                .collect();
            for &f in &frontiers.cells {
                let (fx, fy) = dims.coords(f);
                // Frontiers further than the range from the window add nothing.
                if (fx as i64) + k < x0 as i64
                    || (fx as i64) - k > x1 as i64
                    || (fy as i64) + k < y0 as i64
                    || (fy as i64) - k > y1 as i64
                {
                    continue;
                }
                for &(dx, dy) in &disc {
                    let Some(c) = dims.checked_index(fx as i64 + dx, fy as i64 + dy) else {
                        continue;
                    };
                    if map.get(c) == CellState::Unknown && window.contains(c) {
                        overlay[c] = predicted_state(c);
                    }
                }
            }
        }
    }
    let predicted = overlay
        .iter()
        .enumerate()
        .filter_map(|(c, s)| match s {
            CellState::Free => Some((c, Occupancy::Free)),
            CellState::Occupied => Some((c, Occupancy::Occupied)),
            CellState::Unknown => None,
        })
        .collect();
    Ok(PlanningMap {
        base: map,
        predicted,
        overlay,
        window,
        range,
    })
}
