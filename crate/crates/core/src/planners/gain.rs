use std::collections::BTreeSet;

use crate::frontier::FrontierSet;
use crate::grid::{CellIndex, Dims};
use crate::mapping::{CellState, KnownMap, MapDelta, Sensor};
use crate::nav::{clearance_field, path_tree, DistanceField};
use crate::world::GroundTruth;

use super::{Decision, GainMode, PlanError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GainEstimate {
    pub cells_gained: usize,
    pub mode: GainMode,
}

/// Cells a walk along `path`, scanning at every cell, would reveal.
///
/// `True` integrates real scans into a scratch copy of the map. `Naive`
/// unions the unknown cells each scan would touch if only known-occupied
/// cells stopped rays.
pub fn estimate_gain(
    map: &KnownMap,
    world: &GroundTruth,
    path: &[CellIndex],
    mode: GainMode,
    sensor: &Sensor,
) -> Result<GainEstimate, PlanError> {
    check_path(map, path)?;
    let cells_gained = match mode {
        GainMode::True => {
            let mut scratch = map.clone();
            for &p in path {
                let scan = sensor.cast(world, p)?;
                sensor.integrate(&mut scratch, &scan, world)?;
            }
            scratch.known_count() - map.known_count()
        }
        GainMode::Naive => {
            let mut seen = BTreeSet::new();
            let mut buf = Vec::new();
            for &p in path {
                buf.clear();
                sensor.naive_view_per_ray(map, p, &mut buf);
                seen.extend(buf.iter().copied());
            }
            seen.len()
        }
    };
    Ok(GainEstimate { cells_gained, mode })
}

fn check_path(map: &KnownMap, path: &[CellIndex]) -> Result<(), PlanError> {
    let dims = map.dims();
    if path.is_empty() {
        return Err(PlanError::InvalidPath("empty".into()));
    }
    for &c in path {
        if c >= dims.len() || !map.is_free(c) {
            return Err(PlanError::InvalidPath(format!("cell {c} is not known free")));
        }
    }
    for w in path.windows(2) {
        let (ax, ay) = dims.coords(w[0]);
        let (bx, by) = dims.coords(w[1]);
        if w[0] == w[1] || ax.abs_diff(bx) > 1 || ay.abs_diff(by) > 1 {
            return Err(PlanError::InvalidPath(format!("cells {} and {} are not adjacent", w[0], w[1])));
        }
    }
    Ok(())
}

/// Per-cell scan views kept across decisions of one episode.
///
/// A true view only loses cells as the map fills in, so it is computed once
/// and filtered to unknown cells on use. A naive view is recomputed when a
/// cell it touches turns out occupied.
#[derive(Clone, Debug)]
pub struct GainCache {
    mode: GainMode,
    dims: Dims,
    views: Vec<Option<Vec<u32>>>,
    buf: Vec<CellIndex>,
}

impl GainCache {
    pub fn new(dims: Dims, mode: GainMode) -> Self {
        Self {
            mode,
            dims,
            views: vec![None; dims.len()],
            buf: Vec::new(),
        }
    }

    pub fn mode(&self) -> GainMode {
        self.mode
    }

    /// Invalidates views a map update may have changed.
    pub fn observe(&mut self, delta: &MapDelta, sensor: &Sensor) {
        if self.mode != GainMode::Naive {
            return;
        }
        let r = sensor.reach_cells() as i64;
        for &(c, s) in &delta.changed {
            if s != CellState::Occupied {
                continue;
            }
            let (cx, cy) = self.dims.coords(c);
            for y in (cy as i64 - r)..=(cy as i64 + r) {
                for x in (cx as i64 - r)..=(cx as i64 + r) {
                    if let Some(q) = self.dims.checked_index(x, y) {
                        // Rays from q that never reached c cannot change.
                        if self.views[q].as_ref().is_some_and(|v| v.binary_search(&(c as u32)).is_ok()) {
                            self.views[q] = None;
                        }
                    }
                }
            }
        }
    }

    /// Brings the view of `p` up to date with `map` and adds its cells to
    /// `counts`, returning how many were not counted before.
    fn enter(
        &mut self,
        p: CellIndex,
        map: &KnownMap,
        world: &GroundTruth,
        sensor: &Sensor,
        counts: &mut [u16],
    ) -> usize {
        let mut fresh = 0;
        let mut add = |c: u32| {
            let n = &mut counts[c as usize];
            *n += 1;
            fresh += (*n == 1) as usize;
        };
        match &mut self.views[p] {
            Some(v) => v.retain(|&c| {
                let keep = map.get(c as usize) == CellState::Unknown;
                if keep {
                    add(c);
                }
                keep
            }),
            slot @ None => {
                self.buf.clear();
                match self.mode {
                    GainMode::True => sensor.true_view(world, map, p, &mut self.buf),
                    GainMode::Naive => sensor.naive_view(map, p, &mut self.buf),
                }
                let v: Vec<u32> = self.buf.iter().map(|&c| c as u32).collect();
                v.iter().for_each(|&c| add(c));
                *slot = Some(v);
            }
        }
        fresh
    }

    /// Removes the view of `p` from `counts`, returning how many cells
    /// dropped to zero.
    fn leave(&self, p: CellIndex, counts: &mut [u16]) -> usize {
        let mut gone = 0;
        for &c in self.get(p) {
            let n = &mut counts[c as usize];
            *n -= 1;
            gone += (*n == 0) as usize;
        }
        gone
    }

    fn get(&self, p: CellIndex) -> &[u32] {
        self.views[p].as_deref().unwrap_or(&[])
    }
}

/// Information-gain planner with a per-episode view cache.
#[derive(Clone, Debug)]
pub struct InfoGainPlanner {
    pub cache: GainCache,
    counts: Vec<u16>,
}

impl InfoGainPlanner {
    pub fn new(dims: Dims, mode: GainMode) -> Self {
        Self {
            cache: GainCache::new(dims, mode),
            counts: vec![0; dims.len()],
        }
    }

    /// Gain of the extracted path to every frontier, in frontier order;
    /// `None` for unreachable frontiers.
    ///
    /// Paths follow the preferred-predecessor tree, so the union for each
    /// frontier is accumulated by one depth-first walk over the tree.
    pub fn frontier_gains(
        &mut self,
        map: &KnownMap,
        world: &GroundTruth,
        sensor: &Sensor,
        robot_field: &DistanceField,
        clearance: &DistanceField,
        frontiers: &FrontierSet,
    ) -> Vec<Option<usize>> {
        let dims = map.dims();
        let tree = path_tree(robot_field, clearance);
        let root = robot_field.sources()[0];
        // Mark tree nodes with a reachable frontier below them.
        let mut needed = vec![false; dims.len()];
        let mut frontier_slot = vec![u32::MAX; dims.len()];
        for (i, &f) in frontiers.cells.iter().enumerate() {
            if !robot_field.is_reachable(f) {
                continue;
            }
            frontier_slot[f] = i as u32;
            let mut c = f;
            loop {
                if needed[c] {
                    break;
                }
                needed[c] = true;
                match tree[c] {
                    Some(p) => c = p,
                    None => break,
                }
            }
        }
        let mut gains = vec![None; frontiers.len()];
        if !needed[root] {
            return gains;
        }
        // Children lists of needed nodes, compressed.
        let mut start = vec![0u32; dims.len() + 1];
        for c in 0..dims.len() {
            if needed[c] {
                if let Some(p) = tree[c] {
                    start[p + 1] += 1;
                }
            }
        }
        for i in 0..dims.len() {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut children = vec![0u32; start[dims.len()] as usize];
        for c in 0..dims.len() {
            if needed[c] {
                if let Some(p) = tree[c] {
                    children[fill[p] as usize] = c as u32;
                    fill[p] += 1;
                }
            }
        }
        let counts = &mut self.counts;
        let mut stack: Vec<(usize, u32)> = vec![(root, start[root])];
        let mut distinct = self.cache.enter(root, map, world, sensor, counts);
        if frontier_slot[root] != u32::MAX {
            gains[frontier_slot[root] as usize] = Some(distinct);
        }
        while let Some(top) = stack.last_mut() {
            let (node, next) = *top;
            if next < start[node + 1] {
                top.1 += 1;
                let child = children[next as usize] as usize;
                distinct += self.cache.enter(child, map, world, sensor, counts);
                if frontier_slot[child] != u32::MAX {
                    gains[frontier_slot[child] as usize] = Some(distinct);
                }
                stack.push((child, start[child]));
            } else {
                stack.pop();
                distinct -= self.cache.leave(node, counts);
            }
        }
        debug_assert_eq!(distinct, 0);
        gains
    }

    /// Maximizes `lambda * ln(max(gain, 1)) - distance` over reachable
    /// frontiers; ties go to the lowest index.
    #[allow(clippy::too_many_arguments)]
    pub fn plan(
        &mut self,
        map: &KnownMap,
        world: &GroundTruth,
        sensor: &Sensor,
        robot_field: &DistanceField,
        clearance: &DistanceField,
        frontiers: &FrontierSet,
        lambda: f64,
    ) -> Result<Decision, PlanError> {
        let gains = self.frontier_gains(map, world, sensor, robot_field, clearance, frontiers);
        let mut best: Option<(usize, f64)> = None;
        for (&f, g) in frontiers.cells.iter().zip(&gains) {
            let Some(g) = *g else { continue };
            let obj = lambda * (g.max(1) as f64).ln() - robot_field.get(f);
            if best.map_or(true, |(_, b)| obj > b) {
                best = Some((f, obj));
            }
        }
        let (target, objective_value) = best.ok_or(PlanError::NoReachableFrontier)?;
        Ok(Decision {
            target,
            objective_value,
            used_fallback: false,
        })
    }
}

/// One-shot information-gain decision with a fresh cache.
pub fn plan_info_gain(
    map: &KnownMap,
    world: &GroundTruth,
    robot_field: &DistanceField,
    frontiers: &FrontierSet,
    lambda: f64,
    gain_mode: GainMode,
    sensor: &Sensor,
) -> Result<Decision, PlanError> {
    let clearance = clearance_field(map);
    InfoGainPlanner::new(map.dims(), gain_mode).plan(map, world, sensor, robot_field, &clearance, frontiers, lambda)
}
