//! Exact shortest paths on the 8-connected grid.
//!
//! Axis moves cost one cell edge, diagonal moves `√2` edges, and a diagonal
//! move is refused when both cells it sweeps past are blocked. Distances
//! are stored in meters.
//!
//! Only two edge weights exist, so the search keeps one FIFO queue per
//! weight instead of a heap: keys pushed into each queue are non-decreasing,
//! and popping the smallest queue head is a valid priority queue.

use std::collections::VecDeque;

use thiserror::Error;

use crate::grid::{CellIndex, Dims};
use crate::mapping::{CellState, KnownMap};

/// Tolerance used to recognise shortest-path predecessors.
pub const PATH_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum NavError {
    #[error("distance field needs at least one source")]
    EmptySources,
    #[error("source cell {0} is not traversable")]
    SourceBlocked(CellIndex),
    #[error("cell {0} is unreachable")]
    Unreachable(CellIndex),
}

/// Shortest-path distances from a source set.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    dims: Dims,
    cell_size: f64,
    distances: Vec<f64>,
    sources: Vec<CellIndex>,
    /// Which traversability predicate produced the field.
    pub label: &'static str,
}

impl DistanceField {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn sources(&self) -> &[CellIndex] {
        &self.sources
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn get(&self, cell: CellIndex) -> f64 {
        self.distances[cell]
    }

    pub fn is_reachable(&self, cell: CellIndex) -> bool {
        self.distances[cell].is_finite()
    }
}

/// Reusable buffers for repeated searches.
#[derive(Default)]
pub struct Search {
    queues: [VecDeque<(f64, u32)>; 3],
}

impl Search {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs the search into `dist` (which must be pre-filled with infinity).
    /// Stops early once `stop` has been settled, if given; cells closer than
    /// `stop` are then exact and the rest hold upper bounds.
    pub fn run<P>(
        &mut self,
        dims: Dims,
        cell_size: f64,
        passable: &P,
        sources: &[CellIndex],
        dist: &mut [f64],
        stop: Option<CellIndex>,
    ) where
        P: Fn(CellIndex) -> bool + ?Sized,
    {
        let axis = cell_size;
        let diag = cell_size * std::f64::consts::SQRT_2;
        for q in &mut self.queues {
            q.clear();
        }
        for &s in sources {
            if dist[s] > 0.0 {
                dist[s] = 0.0;
                self.queues[0].push_back((0.0, s as u32));
            }
        }
        loop {
            let mut best = usize::MAX;
            let mut best_key = f64::INFINITY;
            for (i, q) in self.queues.iter().enumerate() {
                if let Some(&(k, _)) = q.front() {
                    if k < best_key {
                        best_key = k;
                        best = i;
                    }
                }
            }
            if best == usize::MAX {
                break;
            }
            let (key, cell) = self.queues[best].pop_front().expect("non-empty");
            let cell = cell as usize;
            if key > dist[cell] {
                continue;
            }
            if stop == Some(cell) {
                break;
            }
            let [_, qa, qd] = &mut self.queues;
            dims.for_each_move(cell, passable, |next, mv| {
                let (w, q) = if mv.is_diagonal() { (diag, &mut *qd) } else { (axis, &mut *qa) };
                let nd = key + w;
                if nd < dist[next] {
                    dist[next] = nd;
                    q.push_back((nd, next as u32));
                }
            });
        }
    }
}

/// Exact multi-source shortest-path distances over cells satisfying
/// `passable`.
pub fn distance_field<P>(
    dims: Dims,
    cell_size: f64,
    passable: &P,
    sources: &[CellIndex],
) -> Result<DistanceField, NavError>
where
    P: Fn(CellIndex) -> bool + ?Sized,
{
    if sources.is_empty() {
        return Err(NavError::EmptySources);
    }
    if let Some(&s) = sources.iter().find(|&&s| !passable(s)) {
        return Err(NavError::SourceBlocked(s));
    }
    let mut distances = vec![f64::INFINITY; dims.len()];
    Search::new().run(dims, cell_size, passable, sources, &mut distances, None);
    let mut sources = sources.to_vec();
    sources.sort_unstable();
    sources.dedup();
    Ok(DistanceField {
        dims,
        cell_size,
        distances,
        sources,
        label: "custom",
    })
}

/// Distances from `source` through known-free cells of `map`.
pub fn known_free_field(map: &KnownMap, source: CellIndex) -> Result<DistanceField, NavError> {
    let mut f = distance_field(map.dims(), map.cell_size(), &|c| map.is_free(c), &[source])?;
    f.label = "known-free";
    Ok(f)
}

/// Grid distance from every cell to the nearest cell that is not known
/// free. All cells are traversable for this field, so the value is the
/// octile distance to the closest wall or unknown cell.
pub fn clearance_field(map: &KnownMap) -> DistanceField {
    let dims = map.dims();
    let mut g = PaddedGrid::whole(dims, &|_| true);
    let sources: Vec<CellIndex> = (0..dims.len()).filter(|&c| map.get(c) != CellState::Free).collect();
    let slots: Vec<usize> = sources.iter().map(|&c| g.slot(dims, c).expect("in grid")).collect();
    let mut dist = Vec::new();
    g.search(map.cell_size(), &slots, &mut dist);
    let mut f = g.to_field(dims, map.cell_size(), &dist, sources);
    f.label = "clearance";
    f
}

/// A rectangular sub-grid surrounded by one ring of blocked padding, so
/// neighbour lookups need no bounds checks. Used for repeated searches.
#[derive(Clone, Debug)]
pub struct PaddedGrid {
    width: usize,
    height: usize,
    x0: usize,
    y0: usize,
    pw: usize,
    passable: Vec<bool>,
    queues: [VecDeque<(f64, u32)>; 3],
}

impl PaddedGrid {
    /// Covers cells `x0..=x1`, `y0..=y1` of `dims`.
    pub fn new<P>(dims: Dims, (x0, y0, x1, y1): (usize, usize, usize, usize), passable: &P) -> Self
    where
        P: Fn(CellIndex) -> bool + ?Sized,
    {
        let (width, height) = (x1 - x0 + 1, y1 - y0 + 1);
        let pw = width + 2;
        let mut cells = vec![false; pw * (height + 2)];
        for y in 0..height {
            for x in 0..width {
                cells[(y + 1) * pw + x + 1] = passable(dims.index(x0 + x, y0 + y));
            }
        }
        Self {
            width,
            height,
            x0,
            y0,
            pw,
            passable: cells,
            queues: Default::default(),
        }
    }

    pub fn whole<P>(dims: Dims, passable: &P) -> Self
    where
        P: Fn(CellIndex) -> bool + ?Sized,
    {
        Self::new(dims, (0, 0, dims.width - 1, dims.height - 1), passable)
    }

    /// Number of padded slots; distance buffers have this length.
    pub fn slots(&self) -> usize {
        self.passable.len()
    }

    /// Padded slot of a grid cell inside the covered rectangle.
    pub fn slot(&self, dims: Dims, cell: CellIndex) -> Option<usize> {
        let (x, y) = dims.coords(cell);
        if x < self.x0 || y < self.y0 || x >= self.x0 + self.width || y >= self.y0 + self.height {
            return None;
        }
        Some((y - self.y0 + 1) * self.pw + (x - self.x0) + 1)
    }

    /// Grid cell of a padded slot, `None` for padding.
    pub fn cell(&self, dims: Dims, slot: usize) -> Option<CellIndex> {
        let (px, py) = (slot % self.pw, slot / self.pw);
        if px == 0 || py == 0 || px > self.width || py > self.height {
            return None;
        }
        Some(dims.index(self.x0 + px - 1, self.y0 + py - 1))
    }

    pub fn is_passable(&self, slot: usize) -> bool {
        self.passable[slot]
    }

    /// Exact distances from `sources` (padded slots) into `dist`, which is
    /// resized and reset.
    pub fn search(&mut self, cell_size: f64, sources: &[usize], dist: &mut Vec<f64>) {
        dist.clear();
        dist.resize(self.passable.len(), f64::INFINITY);
        let axis = cell_size;
        let diag = cell_size * std::f64::consts::SQRT_2;
        let pw = self.pw as isize;
        // Same move order as `grid::MOVES`.
        let axis_off = [1isize, -1, pw, -pw];
        let diag_off = [(1isize, pw), (1, -pw), (-1, pw), (-1, -pw)];
        let passable = &self.passable;
        for q in &mut self.queues {
            q.clear();
        }
        for &s in sources {
            if passable[s] && dist[s] > 0.0 {
                dist[s] = 0.0;
                self.queues[0].push_back((0.0, s as u32));
            }
        }
        loop {
            let mut best = usize::MAX;
            let mut best_key = f64::INFINITY;
            for (i, q) in self.queues.iter().enumerate() {
                if let Some(&(k, _)) = q.front() {
                    if k < best_key {
                        best_key = k;
                        best = i;
                    }
                }
            }
            if best == usize::MAX {
                break;
            }
            let (key, cell) = self.queues[best].pop_front().expect("non-empty");
            let cell = cell as isize;
            if key > dist[cell as usize] {
                continue;
            }
            let nd = key + axis;
            for off in axis_off {
                let n = (cell + off) as usize;
                if passable[n] && nd < dist[n] {
                    dist[n] = nd;
                    self.queues[1].push_back((nd, n as u32));
                }
            }
            let nd = key + diag;
            for (ox, oy) in diag_off {
                let n = (cell + ox + oy) as usize;
                if passable[n]
                    && nd < dist[n]
                    && (passable[(cell + ox) as usize] || passable[(cell + oy) as usize])
                {
                    dist[n] = nd;
                    self.queues[2].push_back((nd, n as u32));
                }
            }
        }
    }

    /// Copies padded distances back into a full-grid field.
    pub fn to_field(&self, dims: Dims, cell_size: f64, dist: &[f64], sources: Vec<CellIndex>) -> DistanceField {
        let mut distances = vec![f64::INFINITY; dims.len()];
        for y in 0..self.height {
            let row = (y + 1) * self.pw + 1;
            let base = dims.index(self.x0, self.y0 + y);
            distances[base..base + self.width].copy_from_slice(&dist[row..row + self.width]);
        }
        DistanceField {
            dims,
            cell_size,
            distances,
            sources,
            label: "custom",
        }
    }
}

/// [`known_free_field`] computed on a padded grid.
pub fn known_free_field_fast(map: &KnownMap, source: CellIndex) -> Result<DistanceField, NavError> {
    if !map.is_free(source) {
        return Err(NavError::SourceBlocked(source));
    }
    let dims = map.dims();
    let mut g = PaddedGrid::whole(dims, &|c| map.is_free(c));
    let mut dist = Vec::new();
    let s = g.slot(dims, source).expect("in grid");
    g.search(map.cell_size(), &[s], &mut dist);
    let mut f = g.to_field(dims, map.cell_size(), &dist, vec![source]);
    f.label = "known-free";
    Ok(f)
}

/// One leg of a plan.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub cells: Vec<CellIndex>,
    /// Meters.
    pub length: f64,
}

impl Path {
    /// Sum of per-move metric lengths.
    pub fn metric_length(dims: Dims, cell_size: f64, cells: &[CellIndex]) -> f64 {
        cells
            .windows(2)
            .map(|w| {
                let (ax, ay) = dims.coords(w[0]);
                let (bx, by) = dims.coords(w[1]);
                if ax != bx && ay != by {
                    cell_size * std::f64::consts::SQRT_2
                } else {
                    cell_size
                }
            })
            .sum()
    }
}

/// The shortest-path predecessor of `cell` preferred when backtracking:
/// greatest clearance first, then lowest index.
pub fn predecessor(field: &DistanceField, clearance: &DistanceField, cell: CellIndex) -> Option<CellIndex> {
    let d = field.distances[cell];
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let reachable = |c: CellIndex| field.distances[c].is_finite();
    let mut best: Option<(CellIndex, f64)> = None;
    field.dims.for_each_move(cell, &reachable, |n, mv| {
        let dn = field.distances[n];
        if dn >= d || (dn + mv.length(field.cell_size) - d).abs() > PATH_EPS {
            return;
        }
        let cl = clearance.distances[n];
        let better = match best {
            None => true,
            Some((b, bcl)) => cl > bcl || (cl == bcl && n < b),
        };
        if better {
            best = Some((n, cl));
        }
    });
    best.map(|(n, _)| n)
}

/// Backtracks a shortest path from the field's source to `goal`.
pub fn extract_path(field: &DistanceField, goal: CellIndex, clearance: &DistanceField) -> Result<Path, NavError> {
    if goal >= field.distances.len() || !field.distances[goal].is_finite() {
        return Err(NavError::Unreachable(goal));
    }
    let mut cells = vec![goal];
    let mut cur = goal;
    while let Some(prev) = predecessor(field, clearance, cur) {
        cells.push(prev);
        cur = prev;
    }
    debug_assert_eq!(field.distances[cur], 0.0);
    cells.reverse();
    let length = Path::metric_length(field.dims, field.cell_size, &cells);
    Ok(Path { cells, length })
}

/// Preferred predecessor of every reachable cell; following it from any
/// cell reproduces [`extract_path`].
pub fn path_tree(field: &DistanceField, clearance: &DistanceField) -> Vec<Option<CellIndex>> {
    (0..field.dims.len())
        .map(|c| predecessor(field, clearance, c))
        .collect()
}
