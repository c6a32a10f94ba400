#![allow(dead_code)]

use std::collections::VecDeque;

use explore_core::frontier::{FrontierSet, Window};
use explore_core::grid::{CellIndex, Dims};
use explore_core::mapping::{CellState, KnownMap, Sensor};
use explore_core::nav::DistanceField;
use explore_core::predictor::PlanningMap;
use explore_core::world::{GroundTruth, Occupancy};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Neighbours under the 8-connected rule with the corner restriction,
/// written out independently of the library.
pub fn neighbours(dims: Dims, passable: &dyn Fn(CellIndex) -> bool, c: CellIndex) -> Vec<(CellIndex, bool)> {
    let (x, y) = (c % dims.width, c / dims.width);
    let ok = |x: i64, y: i64| x >= 0 && y >= 0 && (x as usize) < dims.width && (y as usize) < dims.height;
    let idx = |x: i64, y: i64| y as usize * dims.width + x as usize;
    let mut out = Vec::new();
    for dy in -1i64..=1 {
        for dx in -1i64..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if !ok(nx, ny) || !passable(idx(nx, ny)) {
                continue;
            }
            let diagonal = dx != 0 && dy != 0;
            if diagonal {
                let side_a = passable(idx(x as i64 + dx, y as i64));
                let side_b = passable(idx(x as i64, y as i64 + dy));
                if !side_a && !side_b {
                    continue;
                }
            }
            out.push((idx(nx, ny), diagonal));
        }
    }
    out
}

/// Label-correcting relaxation to a fixpoint.
pub fn relax(dims: Dims, cell_size: f64, passable: &dyn Fn(CellIndex) -> bool, sources: &[CellIndex]) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; dims.len()];
    let mut queue = VecDeque::new();
    let mut queued = vec![false; dims.len()];
    for &s in sources {
        dist[s] = 0.0;
        queue.push_back(s);
        queued[s] = true;
    }
    while let Some(c) = queue.pop_front() {
        queued[c] = false;
        for (n, diagonal) in neighbours(dims, passable, c) {
            let w = if diagonal { cell_size * std::f64::consts::SQRT_2 } else { cell_size };
            let nd = dist[c] + w;
            if nd < dist[n] {
                dist[n] = nd;
                if !queued[n] {
                    queued[n] = true;
                    queue.push_back(n);
                }
            }
        }
    }
    dist
}

pub fn random_blocked(rng: &mut ChaCha8Rng, dims: Dims, density: f64) -> Vec<bool> {
    (0..dims.len()).map(|_| rng.gen_bool(density)).collect()
}

/// Free cells with an unknown 4-neighbour, by brute force.
pub fn frontier_oracle(map: &KnownMap) -> Vec<CellIndex> {
    let dims = map.dims();
    let mut out = Vec::new();
    for y in 0..dims.height {
        for x in 0..dims.width {
            let c = y * dims.width + x;
            if map.get(c) != CellState::Free {
                continue;
            }
            let mut found = false;
            for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < dims.width && (ny as usize) < dims.height {
                    found |= map.get(ny as usize * dims.width + nx as usize) == CellState::Unknown;
                }
            }
            if found {
                out.push(c);
            }
        }
    }
    out
}

/// Scans at `start`, then takes `steps` random moves over known-free cells,
/// scanning after each. Returns the map and the final position.
pub fn random_walk_state(
    world: &GroundTruth,
    sensor: &Sensor,
    start: CellIndex,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> (KnownMap, CellIndex) {
    let mut map = KnownMap::unknown(world.dims(), world.cell_size());
    let mut pos = start;
    let scan = sensor.cast(world, pos).unwrap();
    sensor.integrate(&mut map, &scan, world).unwrap();
    for _ in 0..steps {
        let free = |c: CellIndex| map.is_free(c);
        let options = neighbours(world.dims(), &free, pos);
        if options.is_empty() {
            break;
        }
        pos = options[rng.gen_range(0..options.len())].0;
        let scan = sensor.cast(world, pos).unwrap();
        sensor.integrate(&mut map, &scan, world).unwrap();
    }
    (map, pos)
}

/// Distance-advantage target by direct evaluation of every candidate.
pub fn advantage_oracle(
    planning: &PlanningMap,
    window: &Window,
    robot: CellIndex,
    inside: &FrontierSet,
    outside: &FrontierSet,
    known_field: &DistanceField,
) -> (CellIndex, bool) {
    let dims = planning.base().dims();
    let cs = planning.base().cell_size();
    let passable = |c: CellIndex| window.contains(c) && planning.is_traversable(c);
    let d_robot = relax(dims, cs, &passable, &[robot]);
    let region: Vec<CellIndex> = (0..dims.len()).filter(|&c| d_robot[c].is_finite()).collect();
    let mut best: Option<(CellIndex, f64)> = None;
    for &t in &inside.cells {
        if !known_field.is_reachable(t) || !d_robot[t].is_finite() {
            continue;
        }
        let d_t = relax(dims, cs, &passable, &[t]);
        let mut sum = 0.0;
        for &s in &region {
            sum += d_t[s];
        }
        let value = sum / region.len() as f64 - d_robot[t];
        if best.map_or(true, |(_, b)| value > b) {
            best = Some((t, value));
        }
    }
    if let Some((t, _)) = best {
        return (t, false);
    }
    let nearest = |set: &FrontierSet| {
        set.cells
            .iter()
            .copied()
            .filter(|&f| known_field.is_reachable(f))
            .min_by(|&a, &b| known_field.get(a).total_cmp(&known_field.get(b)).then(a.cmp(&b)))
    };
    (nearest(outside).or_else(|| nearest(inside)).expect("some reachable frontier"), true)
}

/// Sealed random world: noise walls with a free border ring inside the
/// outer wall, so everything stays connected.
pub fn open_world(rng: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> GroundTruth {
    let dims = Dims::new(w, h);
    let mut cells = vec![Occupancy::Free; dims.len()];
    for y in 0..h {
        for x in 0..w {
            let c = dims.index(x, y);
            if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                cells[c] = Occupancy::Occupied;
            } else if x > 1 && y > 1 && x < w - 2 && y < h - 2 && x % 2 == 0 && y % 2 == 0 && rng.gen_bool(density) {
                cells[c] = Occupancy::Occupied;
            }
        }
    }
    let start = dims.index(1, 1);
    GroundTruth::new(dims, cells, 0.25, vec![start]).unwrap()
}
