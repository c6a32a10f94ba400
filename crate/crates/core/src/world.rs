//! Ground-truth environments: the ASCII map format, procedural office, cave
//! and maze generators, and random triangle clutter.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{self, CellIndex, Dims};

/// Default edge length of a grid cell in meters.
pub const DEFAULT_CELL_SIZE: f64 = 0.25;

/// Number of start candidates the generators sample.
pub const GENERATED_STARTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Occupancy {
    Free,
    Occupied,
}

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error("map text is empty")]
    Empty,
    #[error("line {line} has {found} cells, expected {expected}")]
    RaggedLines {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown map character {ch:?} at line {line}, column {column}")]
    UnknownChar { ch: char, line: usize, column: usize },
    #[error("map has no start cell")]
    NoStart,
    #[error("boundary cell ({x}, {y}) is not occupied")]
    UnsealedBoundary { x: usize, y: usize },
    #[error("start cell {cell} is not free")]
    StartBlocked { cell: CellIndex },
    #[error("start cell {cell} is not connected to start cell {first}")]
    DisconnectedStarts { first: CellIndex, cell: CellIndex },
    #[error("generated worlds must be at least {min}x{min} cells, got {width}x{height}")]
    TooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("generation failed: {0}")]
    GenerationFailed(String),
    #[error("could only place {placed} of {requested} clutter triangles")]
    PlacementExhausted { placed: usize, requested: usize },
    #[error("invalid clutter spec: {0}")]
    InvalidClutter(String),
}

/// Immutable binary occupancy of the environment being explored.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    dims: Dims,
    cells: Vec<Occupancy>,
    cell_size: f64,
    starts: Vec<CellIndex>,
}

impl GroundTruth {
    /// Builds a world and checks the sealing, start and connectivity
    /// invariants.
    pub fn new(
        dims: Dims,
        cells: Vec<Occupancy>,
        cell_size: f64,
        starts: Vec<CellIndex>,
    ) -> Result<Self, WorldError> {
        assert_eq!(cells.len(), dims.len(), "cell buffer does not match dims");
        let world = Self {
            dims,
            cells,
            cell_size,
            starts,
        };
        world.validate()?;
        Ok(world)
    }

    fn validate(&self) -> Result<(), WorldError> {
        for cell in 0..self.dims.len() {
            if self.dims.is_boundary(cell) && self.cells[cell] != Occupancy::Occupied {
                let (x, y) = self.dims.coords(cell);
                return Err(WorldError::UnsealedBoundary { x, y });
            }
        }
        let Some(&first) = self.starts.first() else {
            return Err(WorldError::NoStart);
        };
        for &s in &self.starts {
            if s >= self.dims.len() || self.cells[s] != Occupancy::Free {
                return Err(WorldError::StartBlocked { cell: s });
            }
        }
        let reach = grid::flood_fill(self.dims, &|c| self.is_free(c), &[first]);
        if let Some(&cell) = self.starts.iter().find(|&&s| !reach[s]) {
            return Err(WorldError::DisconnectedStarts { first, cell });
        }
        Ok(())
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn starts(&self) -> &[CellIndex] {
        &self.starts
    }

    pub fn cells(&self) -> &[Occupancy] {
        &self.cells
    }

    pub fn get(&self, cell: CellIndex) -> Occupancy {
        self.cells[cell]
    }

    pub fn is_free(&self, cell: CellIndex) -> bool {
        self.cells[cell] == Occupancy::Free
    }

    pub fn free_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c == Occupancy::Free).count()
    }

    /// Same layout with a different cell edge length.
    pub fn with_cell_size(&self, cell_size: f64) -> Self {
        Self {
            cell_size,
            ..self.clone()
        }
    }

    /// Same layout with a replaced start list.
    pub fn with_starts(&self, starts: Vec<CellIndex>) -> Result<Self, WorldError> {
        Self::new(self.dims, self.cells.clone(), self.cell_size, starts)
    }

    /// Serializes to the ASCII map format ('#', '.', 'S', LF endings).
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.dims.width + 1) * self.dims.height);
        let mut is_start = vec![false; self.dims.len()];
        for &s in &self.starts {
            is_start[s] = true;
        }
        for y in 0..self.dims.height {
            for x in 0..self.dims.width {
                let c = self.dims.index(x, y);
                out.push(match (self.cells[c], is_start[c]) {
                    (Occupancy::Occupied, _) => '#',
                    (Occupancy::Free, true) => 'S',
                    (Occupancy::Free, false) => '.',
                });
            }
            out.push('\n');
        }
        out
    }
}

/// Parses the ASCII map format. Starts are recorded in row-major order.
pub fn parse_env(text: &str) -> Result<GroundTruth, WorldError> {
    parse_env_with_cell_size(text, DEFAULT_CELL_SIZE)
}

pub fn parse_env_with_cell_size(text: &str, cell_size: f64) -> Result<GroundTruth, WorldError> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.is_empty() || lines[0].is_empty() {
        return Err(WorldError::Empty);
    }
    let width = lines[0].chars().count();
    let mut cells = Vec::with_capacity(width * lines.len());
    let mut starts = Vec::new();
    for (y, line) in lines.iter().enumerate() {
        let found = line.chars().count();
        if found != width {
            return Err(WorldError::RaggedLines {
                line: y + 1,
                expected: width,
                found,
            });
        }
        for (x, ch) in line.chars().enumerate() {
            let occ = match ch {
                '#' => Occupancy::Occupied,
                '.' => Occupancy::Free,
                'S' => {
                    starts.push(y * width + x);
                    Occupancy::Free
                }
                _ => {
                    return Err(WorldError::UnknownChar {
                        ch,
                        line: y + 1,
                        column: x + 1,
                    })
                }
            };
            cells.push(occ);
        }
    }
    let dims = Dims::new(width, lines.len());
    // Report the boundary before missing starts so an open map is diagnosed
    // as such even without an 'S'.
    for cell in 0..dims.len() {
        if dims.is_boundary(cell) && cells[cell] != Occupancy::Occupied {
            let (x, y) = dims.coords(cell);
            return Err(WorldError::UnsealedBoundary { x, y });
        }
    }
    GroundTruth::new(dims, cells, cell_size, starts)
}

/// Procedural environment families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Office,
    Cave,
    Maze,
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvKind::Office => "office",
            EnvKind::Cave => "cave",
            EnvKind::Maze => "maze",
        })
    }
}

impl FromStr for EnvKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "office" => Ok(EnvKind::Office),
            "cave" => Ok(EnvKind::Cave),
            "maze" => Ok(EnvKind::Maze),
            other => Err(format!("unknown environment kind {other:?}")),
        }
    }
}

const MIN_GENERATED_SIDE: usize = 40;
const GENERATION_RETRIES: u64 = 16;

/// Generates a sealed, single-component world of the requested family.
/// Output is a pure function of the arguments.
pub fn generate_env(
    kind: EnvKind,
    width: usize,
    height: usize,
    seed: u64,
) -> Result<GroundTruth, WorldError> {
    if width < MIN_GENERATED_SIDE || height < MIN_GENERATED_SIDE {
        return Err(WorldError::TooSmall {
            width,
            height,
            min: MIN_GENERATED_SIDE,
        });
    }
    let dims = Dims::new(width, height);
    let mut last = String::new();
    for attempt in 0..GENERATION_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt + (kind as u64) * 1_000);
        let mut cells = match kind {
            EnvKind::Office => office::generate(dims, &mut rng),
            EnvKind::Cave => cave::generate(dims, &mut rng),
            EnvKind::Maze => maze::generate(dims, &mut rng),
        };
        seal(dims, &mut cells);
        keep_largest_component(dims, &mut cells);
        let free = cells.iter().filter(|&&c| c == Occupancy::Free).count();
        if free * 4 < dims.len() {
            last = format!("free area {free} is below a quarter of {}", dims.len());
            continue;
        }
        let starts = sample_starts(dims, &cells, GENERATED_STARTS, &mut rng);
        if starts.len() < GENERATED_STARTS {
            last = format!("only {} start candidates", starts.len());
            continue;
        }
        return GroundTruth::new(dims, cells, DEFAULT_CELL_SIZE, starts);
    }
    Err(WorldError::GenerationFailed(last))
}

fn seal(dims: Dims, cells: &mut [Occupancy]) {
    for (c, cell) in cells.iter_mut().enumerate() {
        if dims.is_boundary(c) {
            *cell = Occupancy::Occupied;
        }
    }
}

/// Fills every free cell outside the largest connected component.
fn keep_largest_component(dims: Dims, cells: &mut [Occupancy]) {
    let (labels, count) = grid::components(dims, &|c| cells[c] == Occupancy::Free);
    if count <= 1 {
        return;
    }
    let mut sizes = vec![0usize; count];
    for &l in &labels {
        if l != usize::MAX {
            sizes[l] += 1;
        }
    }
    // max_by_key keeps the last maximum; prefer the lowest label on ties.
    let keep = (0..count).rev().max_by_key(|&l| sizes[l]).unwrap_or(0);
    for (c, cell) in cells.iter_mut().enumerate() {
        if labels[c] != keep {
            *cell = Occupancy::Occupied;
        }
    }
}

/// Chebyshev distance (in cells) to the nearest occupied cell, capped.
fn wall_clearance(dims: Dims, cells: &[Occupancy], cell: CellIndex, cap: i64) -> i64 {
    let (x, y) = dims.coords(cell);
    let (x, y) = (x as i64, y as i64);
    for r in 1..=cap {
        for d in -r..=r {
            for (px, py) in [(x + d, y - r), (x + d, y + r), (x - r, y + d), (x + r, y + d)] {
                match dims.checked_index(px, py) {
                    Some(c) if cells[c] == Occupancy::Free => {}
                    _ => return r,
                }
            }
        }
    }
    cap + 1
}

/// Samples well-separated start cells away from walls, returned sorted.
fn sample_starts(
    dims: Dims,
    cells: &[Occupancy],
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<CellIndex> {
    let mut candidates: Vec<CellIndex> = (0..dims.len())
        .filter(|&c| cells[c] == Occupancy::Free && wall_clearance(dims, cells, c, 3) > 3)
        .collect();
    if candidates.len() < count {
        candidates = (0..dims.len()).filter(|&c| cells[c] == Occupancy::Free).collect();
    }
    candidates.shuffle(rng);
    let mut chosen: Vec<CellIndex> = Vec::with_capacity(count);
    let mut spacing = (dims.width.min(dims.height) / 5) as i64;
    while chosen.len() < count && spacing >= 0 {
        for &c in &candidates {
            if chosen.len() == count {
                break;
            }
            let (x, y) = dims.coords(c);
            let far = chosen.iter().all(|&o| {
                let (ox, oy) = dims.coords(o);
                let dx = (x as i64 - ox as i64).abs();
                let dy = (y as i64 - oy as i64).abs();
                dx.max(dy) >= spacing && o != c
            });
            if far {
                chosen.push(c);
            }
        }
        spacing -= spacing / 3 + 1;
    }
    chosen.sort_unstable();
    chosen
}

mod office {
    //! Rectilinear offices: a binary space partition whose upper levels are
    //! corridors and whose lower levels are one-cell walls. Doors are punched
    //! afterwards from each room onto adjacent corridors and, more rarely,
    //! between neighbouring rooms.

    use std::collections::BTreeMap;

    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    use super::Occupancy;
    use crate::grid::Dims;

    const MIN_ROOM: usize = 12;
    const CORRIDOR_MIN: usize = 6;
    const CORRIDOR_MAX: usize = 8;
    const CORRIDOR_SPAN: usize = 72;
    const DOOR: usize = 4;
    const ROOM_CORRIDOR_DOOR_P: f64 = 0.9;
    const ROOM_ROOM_DOOR_P: f64 = 0.3;

    #[derive(Clone, Copy, Debug)]
    struct Rect {
        x0: usize,
        y0: usize,
        x1: usize, // inclusive
        y1: usize, // inclusive
    }

    impl Rect {
        fn width(&self) -> usize {
            self.x1 + 1 - self.x0
        }
        fn height(&self) -> usize {
            self.y1 + 1 - self.y0
        }
    }

    #[derive(Clone, Copy, PartialEq, Eq)]
    enum Kind {
        Room,
        Corridor,
    }

    struct Builder<'a> {
        dims: Dims,
        cells: Vec<Occupancy>,
        regions: Vec<(Rect, Kind)>,
        rng: &'a mut ChaCha8Rng,
    }

    pub(super) fn generate(dims: Dims, rng: &mut ChaCha8Rng) -> Vec<Occupancy> {
        let mut b = Builder {
            dims,
            cells: vec![Occupancy::Free; dims.len()],
            regions: Vec::new(),
            rng,
        };
        let root = Rect {
            x0: 1,
            y0: 1,
            x1: dims.width - 2,
            y1: dims.height - 2,
        };
        b.split(root, 0);
        b.punch_doors();
        b.cells
    }

    impl Builder<'_> {
        fn wall_row(&mut self, y: usize, x0: usize, x1: usize) {
            for x in x0..=x1 {
                let c = self.dims.index(x, y);
                self.cells[c] = Occupancy::Occupied;
            }
        }

        fn wall_col(&mut self, x: usize, y0: usize, y1: usize) {
            for y in y0..=y1 {
                let c = self.dims.index(x, y);
                self.cells[c] = Occupancy::Occupied;
            }
        }

        fn split(&mut self, r: Rect, depth: usize) {
            let vertical = if r.width() == r.height() {
                self.rng.gen_bool(0.5)
            } else {
                r.width() > r.height()
            };
            let long = r.width().max(r.height());

            let corridor = long >= CORRIDOR_SPAN && (depth == 0 || self.rng.gen_bool(0.75));
            if corridor {
                let cw = self.rng.gen_range(CORRIDOR_MIN..=CORRIDOR_MAX);
                // Layout along the split axis: side A | wall | corridor | wall | side B.
                let lo = MIN_ROOM;
                let hi = long - MIN_ROOM - cw - 2;
                let mid = long / 2;
                let spread = (hi - lo) / 3;
                let p = self.rng.gen_range(mid.saturating_sub(spread).max(lo)..=(mid + spread).min(hi));
                let (a, corr, b) = if vertical {
                    let wa = r.x0 + p;
                    let wb = wa + cw + 1;
                    self.wall_col(wa, r.y0, r.y1);
                    self.wall_col(wb, r.y0, r.y1);
                    (
                        Rect { x1: wa - 1, ..r },
                        Rect { x0: wa + 1, x1: wb - 1, ..r },
                        Rect { x0: wb + 1, ..r },
                    )
                } else {
                    let wa = r.y0 + p;
                    let wb = wa + cw + 1;
                    self.wall_row(wa, r.x0, r.x1);
                    self.wall_row(wb, r.x0, r.x1);
                    (
                        Rect { y1: wa - 1, ..r },
                        Rect { y0: wa + 1, y1: wb - 1, ..r },
                        Rect { y0: wb + 1, ..r },
                    )
                };
                self.regions.push((corr, Kind::Corridor));
                self.split(a, depth + 1);
                self.split(b, depth + 1);
                return;
            }

            let can_split = long > 2 * MIN_ROOM;
            let hall = long <= 3 * MIN_ROOM + 4 && self.rng.gen_bool(0.3);
            if !can_split || hall {
                self.regions.push((r, Kind::Room));
                return;
            }
            let p = self.rng.gen_range(MIN_ROOM..=long - MIN_ROOM - 1);
            if vertical {
                let w = r.x0 + p;
                self.wall_col(w, r.y0, r.y1);
                self.split(Rect { x1: w - 1, ..r }, depth + 1);
                self.split(Rect { x0: w + 1, ..r }, depth + 1);
            } else {
                let w = r.y0 + p;
                self.wall_row(w, r.x0, r.x1);
                self.split(Rect { y1: w - 1, ..r }, depth + 1);
                self.split(Rect { y0: w + 1, ..r }, depth + 1);
            }
        }

        /// Wall cells that separate two regions along an axis, grouped by
        /// region pair and wall orientation.
        fn door_candidates(&self, label: &[usize]) -> BTreeMap<(usize, usize, bool), Vec<(usize, usize)>> {
            let mut out: BTreeMap<(usize, usize, bool), Vec<(usize, usize)>> = BTreeMap::new();
            let d = self.dims;
            for y in 1..d.height - 1 {
                for x in 1..d.width - 1 {
                    if self.cells[d.index(x, y)] != Occupancy::Occupied {
                        continue;
                    }
                    for horizontal_wall in [true, false] {
                        let (a, b) = if horizontal_wall {
                            (d.index(x, y - 1), d.index(x, y + 1))
                        } else {
                            (d.index(x - 1, y), d.index(x + 1, y))
                        };
                        let (la, lb) = (label[a], label[b]);
                        if la == usize::MAX || lb == usize::MAX || la == lb {
                            continue;
                        }
                        let key = (la.min(lb), la.max(lb), horizontal_wall);
                        out.entry(key).or_default().push((x, y));
                    }
                }
            }
            out
        }

        fn open(&mut self, cells: &[(usize, usize)]) {
            for &(x, y) in cells {
                let c = self.dims.index(x, y);
                self.cells[c] = Occupancy::Free;
            }
        }

        /// Picks a door of width `DOOR` inside one contiguous run of
        /// candidate wall cells. Runs shorter than a door open entirely.
        fn door_in(&mut self, run_cells: &[(usize, usize)], horizontal_wall: bool) -> Vec<(usize, usize)> {
            let mut runs: Vec<Vec<(usize, usize)>> = Vec::new();
            let mut sorted = run_cells.to_vec();
            if horizontal_wall {
                sorted.sort_by_key(|&(x, y)| (y, x));
            } else {
                sorted.sort_by_key(|&(x, y)| (x, y));
            }
            for c in sorted {
                let adjacent = runs.last().and_then(|r| r.last()).is_some_and(|&(px, py)| {
                    if horizontal_wall {
                        py == c.1 && px + 1 == c.0
                    } else {
                        px == c.0 && py + 1 == c.1
                    }
                });
                if adjacent {
                    runs.last_mut().unwrap().push(c);
                } else {
                    runs.push(vec![c]);
                }
            }
            let run = &runs[self.rng.gen_range(0..runs.len())];
            if run.len() <= DOOR + 2 {
                return run.clone();
            }
            let start = self.rng.gen_range(1..=run.len() - DOOR - 1);
            run[start..start + DOOR].to_vec()
        }

        fn label(&self) -> Vec<usize> {
            let mut label = vec![usize::MAX; self.dims.len()];
            for (i, (r, _)) in self.regions.iter().enumerate() {
                for y in r.y0..=r.y1 {
                    for x in r.x0..=r.x1 {
                        let c = self.dims.index(x, y);
                        if self.cells[c] == Occupancy::Free {
                            label[c] = i;
                        }
                    }
                }
            }
            label
        }

        fn punch_doors(&mut self) {
            let label = self.label();
            let candidates = self.door_candidates(&label);
            let mut has_door = vec![false; self.regions.len()];
            for (&(a, b, horizontal), cells) in &candidates {
                let (ka, kb) = (self.regions[a].1, self.regions[b].1);
                let door = match (ka, kb) {
                    (Kind::Corridor, Kind::Corridor) => cells.clone(),
                    (Kind::Room, Kind::Room) => {
                        if !self.rng.gen_bool(ROOM_ROOM_DOOR_P) {
                            continue;
                        }
                        self.door_in(cells, horizontal)
                    }
                    _ => {
                        if !self.rng.gen_bool(ROOM_CORRIDOR_DOOR_P) {
                            continue;
                        }
                        self.door_in(cells, horizontal)
                    }
                };
                has_door[a] = true;
                has_door[b] = true;
                self.open(&door);
            }
            self.connect(&candidates, &label);
        }

        /// Adds doors between components until the free space is connected.
        fn connect(
            &mut self,
            candidates: &BTreeMap<(usize, usize, bool), Vec<(usize, usize)>>,
            label: &[usize],
        ) {
            loop {
                let cells = &self.cells;
                let (comp, count) =
                    crate::grid::components(self.dims, &|c| cells[c] == Occupancy::Free);
                if count <= 1 {
                    return;
                }
                // Region -> component, via any free cell of the region.
                let mut region_comp = vec![usize::MAX; self.regions.len()];
                for (c, &l) in label.iter().enumerate() {
                    if l != usize::MAX && region_comp[l] == usize::MAX {
                        region_comp[l] = comp[c];
                    }
                }
                let joining: Vec<_> = candidates
                    .iter()
                    .filter(|(&(a, b, _), _)| {
                        region_comp[a] != region_comp[b]
                            && (region_comp[a] == 0 || region_comp[b] == 0)
                    })
                    .collect();
                if joining.is_empty() {
                    return;
                }
                let pick = self.rng.gen_range(0..joining.len());
                let (&(_, _, horizontal), cells) = joining[pick];
                let cells = cells.clone();
                let door = self.door_in(&cells, horizontal);
                self.open(&door);
            }
        }
    }
}

mod cave {
    //! Cellular-automaton caves grown on a coarse lattice, upsampled and
    //! smoothed once more at full resolution.

    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    use super::Occupancy;
    use crate::grid::Dims;

    const SCALE: usize = 2;
    const INITIAL_WALL: f64 = 0.45;
    const ITERATIONS: usize = 5;

    fn wall_neighbours(dims: Dims, wall: &[bool], x: usize, y: usize) -> usize {
        let mut n = 0;
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                match dims.checked_index(x as i64 + dx, y as i64 + dy) {
                    Some(c) if !wall[c] => {}
                    _ => n += 1,
                }
            }
        }
        n
    }

    fn smooth(dims: Dims, wall: &[bool]) -> Vec<bool> {
        let mut next = wall.to_vec();
        for y in 0..dims.height {
            for x in 0..dims.width {
                let n = wall_neighbours(dims, wall, x, y);
                let c = dims.index(x, y);
                next[c] = if wall[c] { n >= 4 } else { n >= 5 };
            }
        }
        next
    }

    pub(super) fn generate(dims: Dims, rng: &mut ChaCha8Rng) -> Vec<Occupancy> {
        let coarse = Dims::new(dims.width.div_ceil(SCALE), dims.height.div_ceil(SCALE));
        let mut wall: Vec<bool> = (0..coarse.len()).map(|_| rng.gen_bool(INITIAL_WALL)).collect();
        for _ in 0..ITERATIONS {
            wall = smooth(coarse, &wall);
        }
        let mut fine: Vec<bool> = (0..dims.len())
            .map(|c| {
                let (x, y) = dims.coords(c);
                wall[coarse.index(x / SCALE, y / SCALE)]
            })
            .collect();
        fine = smooth(dims, &fine);
        fine.into_iter()
            .map(|w| if w { Occupancy::Occupied } else { Occupancy::Free })
            .collect()
    }
}

mod maze {
    //! Depth-first spanning mazes with wide corridors and a small braid
    //! fraction that reopens some dead ends into loops.

    use rand::seq::SliceRandom;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    use super::Occupancy;
    use crate::grid::Dims;

    const CORRIDOR: usize = 4;
    const WALL: usize = 2;
    const BRAID: f64 = 0.12;

    pub(super) fn generate(dims: Dims, rng: &mut ChaCha8Rng) -> Vec<Occupancy> {
        let pitch = CORRIDOR + WALL;
        let nx = (dims.width - WALL) / pitch;
        let ny = (dims.height - WALL) / pitch;
        let mut cells = vec![Occupancy::Occupied; dims.len()];
        let open = |cells: &mut Vec<Occupancy>, x0: usize, y0: usize, w: usize, h: usize| {
            for y in y0..y0 + h {
                for x in x0..x0 + w {
                    cells[dims.index(x, y)] = Occupancy::Free;
                }
            }
        };
        let origin = |i: usize| WALL + i * pitch;
        for j in 0..ny {
            for i in 0..nx {
                open(&mut cells, origin(i), origin(j), CORRIDOR, CORRIDOR);
            }
        }
        // Passages: east (0) and south (1) openings per maze cell.
        let mut passage = vec![[false; 2]; nx * ny];
        let mut visited = vec![false; nx * ny];
        let mut stack = vec![rng.gen_range(0..nx * ny)];
        visited[stack[0]] = true;
        while let Some(&cur) = stack.last() {
            let (i, j) = (cur % nx, cur / nx);
            let mut options = Vec::with_capacity(4);
            if i + 1 < nx && !visited[cur + 1] {
                options.push(cur + 1);
            }
            if i > 0 && !visited[cur - 1] {
                options.push(cur - 1);
            }
            if j + 1 < ny && !visited[cur + nx] {
                options.push(cur + nx);
            }
            if j > 0 && !visited[cur - nx] {
                options.push(cur - nx);
            }
            match options.choose(rng) {
                Some(&next) => {
                    link(&mut passage, nx, cur, next);
                    visited[next] = true;
                    stack.push(next);
                }
                None => {
                    stack.pop();
                }
            }
        }
        // Braid: reopen a minority of dead ends.
        let degree = |passage: &[[bool; 2]], c: usize| {
            let (i, j) = (c % nx, c / nx);
            let mut d = passage[c][0] as usize + passage[c][1] as usize;
            if i > 0 && passage[c - 1][0] {
                d += 1;
            }
            if j > 0 && passage[c - nx][1] {
                d += 1;
            }
            d
        };
        for c in 0..nx * ny {
            if degree(&passage, c) != 1 || !rng.gen_bool(BRAID) {
                continue;
            }
            let (i, j) = (c % nx, c / nx);
            let mut closed = Vec::new();
            if i + 1 < nx && !passage[c][0] {
                closed.push(c + 1);
            }
            if i > 0 && !passage[c - 1][0] {
                closed.push(c - 1);
            }
            if j + 1 < ny && !passage[c][1] {
                closed.push(c + nx);
            }
            if j > 0 && !passage[c - nx][1] {
                closed.push(c - nx);
            }
            if let Some(&n) = closed.choose(rng) {
                link(&mut passage, nx, c, n);
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                let c = j * nx + i;
                if passage[c][0] {
                    open(&mut cells, origin(i) + CORRIDOR, origin(j), WALL, CORRIDOR);
                }
                if passage[c][1] {
                    open(&mut cells, origin(i), origin(j) + CORRIDOR, CORRIDOR, WALL);
                }
            }
        }
        cells
    }

    fn link(passage: &mut [[bool; 2]], nx: usize, a: usize, b: usize) {
        let (lo, hi) = (a.min(b), a.max(b));
        if hi == lo + 1 {
            passage[lo][0] = true;
        } else {
            debug_assert_eq!(hi, lo + nx);
            passage[lo][1] = true;
        }
    }
}

/// Random triangle clutter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClutterSpec {
    pub count: usize,
    /// Nominal triangle size in meters (diameter of the vertex disc).
    pub size: f64,
    pub seed: u64,
}

impl Default for ClutterSpec {
    fn default() -> Self {
        Self {
            count: 0,
            size: 1.0,
            seed: 0,
        }
    }
}

/// Share of free area the default clutter count aims to occlude.
pub const DEFAULT_CLUTTER_DENSITY: f64 = 0.04;

const TRIANGLE_RETRIES: usize = 200;

impl ClutterSpec {
    /// Triangle count expected to occlude roughly `density` of the free
    /// area of `gt`.
    pub fn count_for_density(gt: &GroundTruth, density: f64, size: f64) -> usize {
        // Mean rasterized area, estimated on a fixed sample stream.
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c1u64);
        let samples = 512;
        let mut total = 0usize;
        for _ in 0..samples {
            let tri = sample_triangle(&mut rng, (0.0, 0.0), size);
            total += rasterize_count(&tri, gt.cell_size(), 64);
        }
        let mean = (total as f64 / samples as f64).max(1.0);
        (density * gt.free_count() as f64 / mean).round() as usize
    }
}

type Triangle = [(f64, f64); 3];

fn sample_triangle(rng: &mut ChaCha8Rng, center: (f64, f64), size: f64) -> Triangle {
    let r = size / 2.0;
    let base = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut tri = [(0.0, 0.0); 3];
    for (k, v) in tri.iter_mut().enumerate() {
        let a = base + k as f64 * std::f64::consts::TAU / 3.0 + rng.gen_range(-0.4..0.4);
        let rad = r * rng.gen_range(0.6..1.0);
        *v = (center.0 + rad * a.cos(), center.1 + rad * a.sin());
    }
    tri
}

fn inside(tri: &Triangle, p: (f64, f64)) -> bool {
    let cross = |a: (f64, f64), b: (f64, f64)| (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    let d0 = cross(tri[0], tri[1]);
    let d1 = cross(tri[1], tri[2]);
    let d2 = cross(tri[2], tri[0]);
    let neg = d0 < 0.0 || d1 < 0.0 || d2 < 0.0;
    let pos = d0 > 0.0 || d1 > 0.0 || d2 > 0.0;
    !(neg && pos)
}

fn rasterize_count(tri: &Triangle, cell_size: f64, half: i64) -> usize {
    let mut n = 0;
    for y in -half..half {
        for x in -half..half {
            let p = ((x as f64 + 0.5) * cell_size, (y as f64 + 0.5) * cell_size);
            if inside(tri, p) {
                n += 1;
            }
        }
    }
    n
}

/// Cells whose centers fall inside the triangle.
fn rasterize(tri: &Triangle, dims: Dims, cell_size: f64) -> Vec<CellIndex> {
    let min_x = tri.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
    let max_x = tri.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
    let min_y = tri.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let max_y = tri.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    let x0 = ((min_x / cell_size).floor() as i64 - 1).max(0);
    let x1 = ((max_x / cell_size).ceil() as i64 + 1).min(dims.width as i64 - 1);
    let y0 = ((min_y / cell_size).floor() as i64 - 1).max(0);
    let y1 = ((max_y / cell_size).ceil() as i64 + 1).min(dims.height as i64 - 1);
    let mut out = Vec::new();
    for y in y0..=y1 {
        for x in x0..=x1 {
            let p = ((x as f64 + 0.5) * cell_size, (y as f64 + 0.5) * cell_size);
            if inside(tri, p) {
                out.push(dims.index(x as usize, y as usize));
            }
        }
    }
    out
}

/// Rasterizes `spec.count` random triangles into occupied cells. A triangle
/// that would cover a start cell or split the free space is resampled.
pub fn add_clutter(gt: &GroundTruth, spec: &ClutterSpec) -> Result<GroundTruth, WorldError> {
    if !(spec.size > 0.0) || !spec.size.is_finite() {
        return Err(WorldError::InvalidClutter(format!("size {} must be positive", spec.size)));
    }
    if spec.count == 0 {
        return Ok(gt.clone());
    }
    let dims = gt.dims();
    let cs = gt.cell_size();
    let mut cells = gt.cells().to_vec();
    let mut is_start = vec![false; dims.len()];
    for &s in gt.starts() {
        is_start[s] = true;
    }
    let mut free: Vec<CellIndex> = (0..dims.len()).filter(|&c| cells[c] == Occupancy::Free).collect();
    let mut free_count = free.len();
    let anchor = gt.starts()[0];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for placed in 0..spec.count {
        let mut done = false;
        for _ in 0..TRIANGLE_RETRIES {
            let center_cell = free[rng.gen_range(0..free.len())];
            let (cx, cy) = dims.coords(center_cell);
            let center = ((cx as f64 + 0.5) * cs, (cy as f64 + 0.5) * cs);
            let tri = sample_triangle(&mut rng, center, spec.size);
            let covered: Vec<CellIndex> = rasterize(&tri, dims, cs)
                .into_iter()
                .filter(|&c| cells[c] == Occupancy::Free)
                .collect();
            if covered.is_empty() || covered.iter().any(|&c| is_start[c]) {
                continue;
            }
            for &c in &covered {
                cells[c] = Occupancy::Occupied;
            }
            let reach = grid::flood_fill(dims, &|c| cells[c] == Occupancy::Free, &[anchor]);
            let reached = reach.iter().filter(|&&r| r).count();
            if reached == free_count - covered.len() {
                free_count -= covered.len();
                done = true;
                break;
            }
            for &c in &covered {
                cells[c] = Occupancy::Free;
            }
        }
        if !done {
            return Err(WorldError::PlacementExhausted {
                placed,
                requested: spec.count,
            });
        }
        free.retain(|&c| cells[c] == Occupancy::Free);
    }
    GroundTruth::new(dims, cells, cs, gt.starts().to_vec())
}
