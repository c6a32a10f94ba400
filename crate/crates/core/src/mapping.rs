//! Simulated 360° range sensor and conservative scan accumulation.
//!
//! Every scan starts at a cell center, so the sequence of cells a ray
//! visits is the same from every origin. [`Sensor`] precomputes those
//! sequences once; casting a scan is then a walk over cell offsets.
//!
//! Marking rules:
//! * the origin cell is free;
//! * a cell the ray enters and leaves again before its terminus is free;
//! * the cell where a ray ends at maximum range is only partly seen and
//!   stays unknown;
//! * the first occupied cell entered is occupied (a hit);
//! * a ray crossing a cell corner exactly marks neither side cell free; it
//!   is stopped there when both side cells block.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{CellIndex, Dims};
use crate::world::{GroundTruth, Occupancy};

pub const DEFAULT_RAY_COUNT: usize = 720;
pub const DEFAULT_MAX_RANGE: f64 = 4.5;

const CORNER_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

#[derive(Debug, Error, PartialEq)]
pub enum MappingError {
    #[error("scan origin {0} is not free")]
    OriginBlocked(CellIndex),
    #[error("scan marks cell {cell} {claimed:?} but the world disagrees")]
    InconsistentScan { cell: CellIndex, claimed: CellState },
    #[error("invalid sensor parameters: {0}")]
    InvalidSensor(String),
    #[error("scan geometry does not match this sensor")]
    ScanMismatch,
}

/// Occupancy lookup a ray is cast against.
pub trait Occluder {
    fn dims(&self) -> Dims;
    fn blocks(&self, cell: CellIndex) -> bool;
}

impl Occluder for GroundTruth {
    fn dims(&self) -> Dims {
        GroundTruth::dims(self)
    }

    fn blocks(&self, cell: CellIndex) -> bool {
        self.get(cell) == Occupancy::Occupied
    }
}

/// How a tri-state lookup treats unknown cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnknownPolicy {
    /// Unknown space stops rays.
    Blocking,
    /// Unknown space is assumed empty.
    Transparent,
}

/// A [`KnownMap`] seen through an [`UnknownPolicy`].
pub struct MapOccluder<'a> {
    pub map: &'a KnownMap,
    pub unknown: UnknownPolicy,
}

impl Occluder for MapOccluder<'_> {
    fn dims(&self) -> Dims {
        self.map.dims()
    }

    fn blocks(&self, cell: CellIndex) -> bool {
        match self.map.get(cell) {
            CellState::Free => false,
            CellState::Occupied => true,
            CellState::Unknown => self.unknown == UnknownPolicy::Blocking,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Terminal {
    Hit,
    MaxRange,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayReturn {
    /// Meters from the origin cell center.
    pub range: f64,
    pub terminal: Terminal,
    /// Number of pattern events walked before the terminus.
    pub(crate) events: u32,
}

/// One range measurement set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scan {
    pub origin: CellIndex,
    pub ray_count: usize,
    pub max_range: f64,
    pub rays: Vec<RayReturn>,
}

/// What a ray meets next, relative to its origin cell.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Event {
    /// The ray enters a cell at `t` meters; `full` when it also leaves it
    /// within range.
    Enter { dx: i32, dy: i32, t: f64, full: bool },
    /// The ray crosses a cell corner exactly, touching two side cells.
    Corner { a: (i32, i32), b: (i32, i32), t: f64 },
}

/// Node of the prefix tree shared by all rays, stored in preorder.
#[derive(Clone, Copy, Debug)]
struct ViewNode {
    kind: ViewKind,
    /// Index one past the last node of this subtree.
    end: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum ViewKind {
    Enter { dx: i32, dy: i32, full: bool },
    Corner { a: (i32, i32), b: (i32, i32) },
}

/// Precomputed ray geometry for one (ray count, range, cell size) triple.
#[derive(Clone, Debug)]
pub struct Sensor {
    ray_count: usize,
    max_range: f64,
    cell_size: f64,
    rays: Vec<Vec<Event>>,
    view: Vec<ViewNode>,
    reach: i32,
}

impl fmt::Display for Sensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} rays, {} m range, {} m cells",
            self.ray_count, self.max_range, self.cell_size
        )
    }
}

impl Sensor {
    pub fn new(ray_count: usize, max_range: f64, cell_size: f64) -> Result<Self, MappingError> {
        if ray_count == 0 {
            return Err(MappingError::InvalidSensor("ray_count must be at least 1".into()));
        }
        if !(max_range > 0.0 && max_range.is_finite()) {
            return Err(MappingError::InvalidSensor(format!("max_range {max_range}")));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(MappingError::InvalidSensor(format!("cell_size {cell_size}")));
        }
        let rays: Vec<Vec<Event>> = (0..ray_count)
            .map(|k| {
                let angle = std::f64::consts::TAU * k as f64 / ray_count as f64;
                trace(angle, max_range, cell_size)
            })
            .collect();
        let view = build_view(&rays);
        let reach = (max_range / cell_size).ceil() as i32 + 1;
        Ok(Self {
            ray_count,
            max_range,
            cell_size,
            rays,
            view,
            reach,
        })
    }

    pub fn default_for(cell_size: f64) -> Self {
        Self::new(DEFAULT_RAY_COUNT, DEFAULT_MAX_RANGE, cell_size).expect("default sensor is valid")
    }

    pub fn ray_count(&self) -> usize {
        self.ray_count
    }

    pub fn max_range(&self) -> f64 {
        self.max_range
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    /// Chebyshev radius (cells) beyond which a scan cannot touch anything.
    pub fn reach_cells(&self) -> i32 {
        self.reach
    }

    /// Number of nodes in the shared ray prefix tree.
    pub fn view_nodes(&self) -> usize {
        self.view.len()
    }

    /// Casts all rays from the center of `origin`.
    pub fn cast<O: Occluder + ?Sized>(&self, world: &O, origin: CellIndex) -> Result<Scan, MappingError> {
        let dims = world.dims();
        if origin >= dims.len() || world.blocks(origin) {
            return Err(MappingError::OriginBlocked(origin));
        }
        let (ox, oy) = dims.coords(origin);
        let (ox, oy) = (ox as i64, oy as i64);
        let blocked = |dx: i32, dy: i32| match dims.checked_index(ox + dx as i64, oy + dy as i64) {
            Some(c) => world.blocks(c),
            None => true,
        };
        let rays = self
            .rays
            .iter()
            .map(|events| {
                for (i, ev) in events.iter().enumerate() {
                    let hit = match *ev {
                        Event::Enter { dx, dy, t, .. } => blocked(dx, dy).then_some(t),
                        Event::Corner { a, b, t } => (blocked(a.0, a.1) && blocked(b.0, b.1)).then_some(t),
                    };
                    if let Some(t) = hit {
                        return RayReturn {
                            range: t,
                            terminal: Terminal::Hit,
                            events: i as u32,
                        };
                    }
                }
                RayReturn {
                    range: self.max_range,
                    terminal: Terminal::MaxRange,
                    events: events.len() as u32,
                }
            })
            .collect();
        Ok(Scan {
            origin,
            ray_count: self.ray_count,
            max_range: self.max_range,
            rays,
        })
    }

    /// Conservatively integrates `scan` into `map`, returning the cells whose
    /// state changed. Every claim is checked against `world`.
    pub fn integrate(&self, map: &mut KnownMap, scan: &Scan, world: &GroundTruth) -> Result<MapDelta, MappingError> {
        if scan.ray_count != self.ray_count || scan.rays.len() != self.rays.len() || scan.max_range != self.max_range {
            return Err(MappingError::ScanMismatch);
        }
        let dims = map.dims();
        let (ox, oy) = dims.coords(scan.origin);
        let (ox, oy) = (ox as i64, oy as i64);
        let at = |d: (i32, i32)| dims.checked_index(ox + d.0 as i64, oy + d.1 as i64);
        let mut delta = MapDelta::default();
        mark(map, world, scan.origin, CellState::Free, &mut delta)?;
        for (ret, events) in scan.rays.iter().zip(&self.rays) {
            let n = ret.events as usize;
            for ev in &events[..n] {
                if let Event::Enter { dx, dy, full: true, .. } = *ev {
                    if let Some(c) = at((dx, dy)) {
                        mark(map, world, c, CellState::Free, &mut delta)?;
                    }
                }
            }
            if ret.terminal == Terminal::Hit {
                match events.get(n) {
                    Some(&Event::Enter { dx, dy, .. }) => {
                        if let Some(c) = at((dx, dy)) {
                            mark(map, world, c, CellState::Occupied, &mut delta)?;
                        }
                    }
                    Some(&Event::Corner { a, b, .. }) => {
                        for side in [a, b] {
                            if let Some(c) = at(side) {
                                mark(map, world, c, CellState::Occupied, &mut delta)?;
                            }
                        }
                    }
                    None => return Err(MappingError::ScanMismatch),
                }
            }
        }
        Ok(delta)
    }

    /// Cells a scan from `origin` against the true world would newly reveal
    /// on `map`, appended to `out`. Equivalent to the delta of
    /// [`Sensor::integrate`] minus the origin, but walks the shared prefix
    /// tree instead of every ray.
    pub fn true_view(&self, world: &GroundTruth, map: &KnownMap, origin: CellIndex, out: &mut Vec<CellIndex>) {
        self.walk_view(world.dims(), origin, out, |c| world.blocks(c), |c, _| map.get(c) == CellState::Unknown, true);
    }

    /// Unknown cells a ray sweep from `origin` would touch if unknown space
    /// were empty: only cells known to be occupied stop rays. Superset of
    /// [`Sensor::true_view`] on the same map.
    pub fn naive_view(&self, map: &KnownMap, origin: CellIndex, out: &mut Vec<CellIndex>) {
        self.walk_view(
            map.dims(),
            origin,
            out,
            |c| map.get(c) == CellState::Occupied,
            |c, _| map.get(c) == CellState::Unknown,
            false,
        );
    }

    /// Same cells as [`Sensor::naive_view`], traced ray by ray without the
    /// prefix tree.
    pub fn naive_view_per_ray(&self, map: &KnownMap, origin: CellIndex, out: &mut Vec<CellIndex>) {
        let dims = map.dims();
        let (ox, oy) = dims.coords(origin);
        let (ox, oy) = (ox as i64, oy as i64);
        let at = |d: (i32, i32)| dims.checked_index(ox + d.0 as i64, oy + d.1 as i64);
        let occupied = |c: Option<CellIndex>| c.map_or(true, |c| map.get(c) == CellState::Occupied);
        let start = out.len();
        for events in &self.rays {
            for ev in events {
                match *ev {
                    Event::Enter { dx, dy, .. } => {
                        let c = at((dx, dy));
                        if occupied(c) {
                            break;
                        }
                        let c = c.expect("in bounds");
                        if map.get(c) == CellState::Unknown {
                            out.push(c);
                        }
                    }
                    Event::Corner { a, b, .. } => {
                        let (ca, cb) = (at(a), at(b));
                        for c in [ca, cb].into_iter().flatten() {
                            if map.get(c) == CellState::Unknown {
                                out.push(c);
                            }
                        }
                        if occupied(ca) && occupied(cb) {
                            break;
                        }
                    }
                }
            }
        }
        out[start..].sort_unstable();
        let mut tail = out.split_off(start);
        tail.dedup();
        out.extend(tail);
    }

    /// Preorder walk of the prefix tree. `strict` selects the integration
    /// rules (only fully traversed cells count); otherwise every touched cell
    /// counts.
    fn walk_view<B, K>(&self, dims: Dims, origin: CellIndex, out: &mut Vec<CellIndex>, blocks: B, keep: K, strict: bool)
    where
        B: Fn(CellIndex) -> bool,
        K: Fn(CellIndex, bool) -> bool,
    {
        let start = out.len();
        let (ox, oy) = dims.coords(origin);
        let (ox, oy) = (ox as i64, oy as i64);
        let at = |d: (i32, i32)| dims.checked_index(ox + d.0 as i64, oy + d.1 as i64);
        let mut i = 0usize;
        while i < self.view.len() {
            let node = self.view[i];
            match node.kind {
                ViewKind::Enter { dx, dy, full } => {
                    let Some(c) = at((dx, dy)) else {
                        i = node.end as usize;
                        continue;
                    };
                    if blocks(c) {
                        if keep(c, true) {
                            out.push(c);
                        }
                        i = node.end as usize;
                        continue;
                    }
                    if (full || !strict) && keep(c, false) {
                        out.push(c);
                    }
                }
                ViewKind::Corner { a, b } => {
                    // Off-grid sides block, as in `cast`.
                    let (ca, cb) = (at(a), at(b));
                    let stop = ca.map_or(true, &blocks) && cb.map_or(true, &blocks);
                    if stop || !strict {
                        for c in [ca, cb].into_iter().flatten() {
                            if (!strict || blocks(c)) && keep(c, stop) {
                                out.push(c);
                            }
                        }
                    }
                    if stop {
                        i = node.end as usize;
                        continue;
                    }
                }
            }
            i += 1;
        }
        let tail = &mut out[start..];
        tail.sort_unstable();
        let mut w = 0;
        for r in 0..tail.len() {
            if r == 0 || tail[r] != tail[w - 1] {
                tail[w] = tail[r];
                w += 1;
            }
        }
        out.truncate(start + w);
    }
}

fn mark(
    map: &mut KnownMap,
    world: &GroundTruth,
    cell: CellIndex,
    state: CellState,
    delta: &mut MapDelta,
) -> Result<(), MappingError> {
    let truth = match world.get(cell) {
        Occupancy::Free => CellState::Free,
        Occupancy::Occupied => CellState::Occupied,
    };
    if truth != state {
        return Err(MappingError::InconsistentScan { cell, claimed: state });
    }
    match map.get(cell) {
        CellState::Unknown => {
            map.set_known(cell, state);
            delta.changed.push((cell, state));
            Ok(())
        }
        s if s == state => Ok(()),
        _ => Err(MappingError::InconsistentScan { cell, claimed: state }),
    }
}

/// Uniform grid traversal from the center of cell (0, 0).
fn trace(angle: f64, max_range: f64, cell_size: f64) -> Vec<Event> {
    let range = max_range / cell_size;
    let (dir_x, dir_y) = (angle.cos(), angle.sin());
    let axis = |d: f64| {
        if d.abs() < 1e-12 {
            (0i32, f64::INFINITY, f64::INFINITY)
        } else {
            let step = if d > 0.0 { 1 } else { -1 };
            (step, 0.5 / d.abs(), 1.0 / d.abs())
        }
    };
    let (step_x, mut next_x, delta_x) = axis(dir_x);
    let (step_y, mut next_y, delta_y) = axis(dir_y);
    let (mut cx, mut cy) = (0i32, 0i32);
    let mut events: Vec<Event> = Vec::new();
    loop {
        let t = next_x.min(next_y);
        // Leaving the current cell at `t`: it was fully traversed.
        if let Some(Event::Enter { full, .. }) = events.last_mut() {
            *full = t <= range;
        }
        if t > range {
            break;
        }
        if (next_x - next_y).abs() <= CORNER_EPS {
            events.push(Event::Corner {
                a: (cx + step_x, cy),
                b: (cx, cy + step_y),
                t: t * cell_size,
            });
            cx += step_x;
            cy += step_y;
            next_x += delta_x;
            next_y += delta_y;
        } else if next_x < next_y {
            cx += step_x;
            next_x += delta_x;
        } else {
            cy += step_y;
            next_y += delta_y;
        }
        events.push(Event::Enter {
            dx: cx,
            dy: cy,
            t: t * cell_size,
            full: false,
        });
    }
    events
}

fn build_view(rays: &[Vec<Event>]) -> Vec<ViewNode> {
    // Children keyed by (parent, kind); parent usize::MAX is the root.
    let mut children: HashMap<(usize, ViewKind), usize> = HashMap::new();
    let mut kinds: Vec<ViewKind> = Vec::new();
    let mut child_lists: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for events in rays {
        let mut parent = usize::MAX;
        for ev in events {
            let kind = match *ev {
                Event::Enter { dx, dy, full, .. } => ViewKind::Enter { dx, dy, full },
                Event::Corner { a, b, .. } => ViewKind::Corner { a, b },
            };
            let id = *children.entry((parent, kind)).or_insert_with(|| {
                kinds.push(kind);
                child_lists.push(Vec::new());
                let id = kinds.len() - 1;
                if parent == usize::MAX {
                    roots.push(id);
                } else {
                    child_lists[parent].push(id);
                }
                id
            });
            parent = id;
        }
    }
    let mut out = Vec::with_capacity(kinds.len());
    fn emit(id: usize, kinds: &[ViewKind], child_lists: &[Vec<usize>], out: &mut Vec<ViewNode>) {
        let at = out.len();
        out.push(ViewNode { kind: kinds[id], end: 0 });
        for &c in &child_lists[id] {
            emit(c, kinds, child_lists, out);
        }
        out[at].end = out.len() as u32;
    }
    for &r in &roots {
        emit(r, &kinds, &child_lists, &mut out);
    }
    out
}

/// Cells changed by one integration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MapDelta {
    pub changed: Vec<(CellIndex, CellState)>,
}

impl MapDelta {
    pub fn is_empty(&self) -> bool {
        self.changed.is_empty()
    }

    pub fn len(&self) -> usize {
        self.changed.len()
    }
}

/// The robot's tri-state occupancy grid.
#[derive(Clone, Debug, PartialEq)]
pub struct KnownMap {
    dims: Dims,
    cell_size: f64,
    cells: Vec<CellState>,
    known: usize,
    version: u64,
}

impl KnownMap {
    pub fn unknown(dims: Dims, cell_size: f64) -> Self {
        Self {
            dims,
            cell_size,
            cells: vec![CellState::Unknown; dims.len()],
            known: 0,
            version: 0,
        }
    }

    /// Builds a map from explicit states (fixtures and tests).
    pub fn from_states(dims: Dims, cell_size: f64, cells: Vec<CellState>) -> Self {
        assert_eq!(cells.len(), dims.len());
        let known = cells.iter().filter(|&&c| c != CellState::Unknown).count();
        Self {
            dims,
            cell_size,
            cells,
            known,
            version: 0,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn get(&self, cell: CellIndex) -> CellState {
        self.cells[cell]
    }

    pub fn states(&self) -> &[CellState] {
        &self.cells
    }

    pub fn is_free(&self, cell: CellIndex) -> bool {
        self.cells[cell] == CellState::Free
    }

    /// Number of cells that are not unknown.
    pub fn known_count(&self) -> usize {
        self.known
    }

    /// Incremented on every state change.
    pub fn version(&self) -> u64 {
        self.version
    }

    fn set_known(&mut self, cell: CellIndex, state: CellState) {
        debug_assert_eq!(self.cells[cell], CellState::Unknown);
        debug_assert_ne!(state, CellState::Unknown);
        self.cells[cell] = state;
        self.known += 1;
        self.version += 1;
    }

    /// Debug dump in the map-file alphabet plus '?' for unknown cells.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.dims.width + 1) * self.dims.height);
        for y in 0..self.dims.height {
            for x in 0..self.dims.width {
                out.push(match self.cells[self.dims.index(x, y)] {
                    CellState::Free => '.',
                    CellState::Occupied => '#',
                    CellState::Unknown => '?',
                });
            }
            out.push('\n');
        }
        out
    }

    /// Cells whose state contradicts the world.
    pub fn contradictions(&self, world: &GroundTruth) -> Vec<CellIndex> {
        (0..self.dims.len())
            .filter(|&c| match (self.cells[c], world.get(c)) {
                (CellState::Free, Occupancy::Occupied) => true,
                (CellState::Occupied, Occupancy::Free) => true,
                _ => false,
            })
            .collect()
    }
}

/// Casts one scan with a freshly built sensor.
pub fn cast_scan<O: Occluder + ?Sized>(
    world: &O,
    origin: CellIndex,
    ray_count: usize,
    max_range: f64,
    cell_size: f64,
) -> Result<Scan, MappingError> {
    Sensor::new(ray_count, max_range, cell_size)?.cast(world, origin)
}

/// Integrates a scan cast with the given geometry.
pub fn integrate_scan(map: &mut KnownMap, scan: &Scan, world: &GroundTruth) -> Result<MapDelta, MappingError> {
    Sensor::new(scan.ray_count, scan.max_range, map.cell_size())?.integrate(map, scan, world)
}
