//! Frontier selection rules.

mod advantage;
mod gain;
mod nearest;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::CellIndex;
use crate::mapping::MappingError;
use crate::nav::NavError;
use crate::predictor::{PredictError, PredictionRange};

pub use advantage::{plan_distance_advantage, AdvantageStats};
pub use gain::{estimate_gain, plan_info_gain, GainCache, GainEstimate, InfoGainPlanner};
pub use nearest::plan_nearest_frontier;

pub const DEFAULT_WINDOW_M: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Nf,
    Ig,
    Da,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Nf => "NF",
            Method::Ig => "IG",
            Method::Da => "DA",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NF" => Ok(Method::Nf),
            "IG" => Ok(Method::Ig),
            "DA" => Ok(Method::Da),
            _ => Err(format!("unknown method {s:?} (expected NF, IG or DA)")),
        }
    }
}

/// How the information-gain rule estimates the cells a path would reveal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GainMode {
    /// Unknown space assumed empty.
    Naive,
    /// Rays cast against the true world.
    True,
}

impl fmt::Display for GainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GainMode::Naive => "NAIVE",
            GainMode::True => "TRUE",
        })
    }
}

impl FromStr for GainMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NAIVE" => Ok(GainMode::Naive),
            "TRUE" => Ok(GainMode::True),
            _ => Err(format!("unknown gain mode {s:?} (expected NAIVE or TRUE)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub method: Method,
    /// Information-gain weight; used by IG only.
    pub lambda: f64,
    pub gain_mode: GainMode,
    /// Side of the local planning window in meters; used by DA only.
    pub window_m: f64,
    /// Prediction range; used by DA only.
    pub c_p: PredictionRange,
}

impl PlannerConfig {
    pub fn nf() -> Self {
        Self {
            method: Method::Nf,
            lambda: 0.0,
            gain_mode: GainMode::True,
            window_m: DEFAULT_WINDOW_M,
            c_p: PredictionRange::Cells(0),
        }
    }

    pub fn ig(lambda: f64, gain_mode: GainMode) -> Self {
        Self {
            method: Method::Ig,
            lambda,
            gain_mode,
            ..Self::nf()
        }
    }

    pub fn da(c_p: PredictionRange) -> Self {
        Self {
            method: Method::Da,
            c_p,
            ..Self::nf()
        }
    }

    pub fn with_window(mut self, window_m: f64) -> Self {
        self.window_m = window_m;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub target: CellIndex,
    pub objective_value: f64,
    /// DA found no usable frontier in its window and fell back to the
    /// nearest frontier elsewhere.
    pub used_fallback: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("no reachable frontier")]
    NoReachableFrontier,
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Nav(#[from] NavError),
}
