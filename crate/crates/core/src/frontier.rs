//! Frontier detection and local-window partitioning.

use crate::grid::{CellIndex, Dims, AXIS_MOVES};
use crate::mapping::{CellState, KnownMap};

/// Known-free cells bordering unknown space.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrontierSet {
    /// Sorted ascending.
    pub cells: Vec<CellIndex>,
    /// Map version the set was detected on.
    pub map_version: u64,
}

impl FrontierSet {
    pub fn new(mut cells: Vec<CellIndex>, map_version: u64) -> Self {
        cells.sort_unstable();
        cells.dedup();
        Self { cells, map_version }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: CellIndex) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }
}

/// True when `cell` is free with an unknown 4-neighbour.
pub fn is_frontier(map: &KnownMap, cell: CellIndex) -> bool {
    if map.get(cell) != CellState::Free {
        return false;
    }
    let dims = map.dims();
    AXIS_MOVES
        .iter()
        .any(|&mv| dims.step(cell, mv).is_some_and(|n| map.get(n) == CellState::Unknown))
}

pub fn detect_frontiers(map: &KnownMap) -> FrontierSet {
    let cells = (0..map.dims().len()).filter(|&c| is_frontier(map, c)).collect();
    FrontierSet {
        cells,
        map_version: map.version(),
    }
}

/// Axis-aligned square of side `side_m` meters centered on a cell. Cell
/// membership is decided by cell center; the boundary is closed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    dims: Dims,
    cx: i64,
    cy: i64,
    half: i64,
}

impl Window {
    pub fn new(dims: Dims, cell_size: f64, center: CellIndex, side_m: f64) -> Self {
        assert!(side_m > 0.0, "window side must be positive");
        let (cx, cy) = dims.coords(center);
        let limit = side_m / 2.0;
        let mut half = (limit / cell_size).floor() as i64;
        while ((half + 1) as f64) * cell_size <= limit {
            half += 1;
        }
        while half > 0 && (half as f64) * cell_size > limit {
            half -= 1;
        }
        Self {
            dims,
            cx: cx as i64,
            cy: cy as i64,
            half,
        }
    }

    /// Half side in cells.
    pub fn half_cells(&self) -> i64 {
        self.half
    }

    pub fn center(&self) -> (i64, i64) {
        (self.cx, self.cy)
    }

    pub fn contains(&self, cell: CellIndex) -> bool {
        let (x, y) = self.dims.coords(cell);
        (x as i64 - self.cx).abs() <= self.half && (y as i64 - self.cy).abs() <= self.half
    }

    /// Inclusive cell bounds clipped to the grid: (x0, y0, x1, y1).
    pub fn bounds(&self) -> (usize, usize, usize, usize) {
        let x0 = (self.cx - self.half).max(0) as usize;
        let y0 = (self.cy - self.half).max(0) as usize;
        let x1 = (self.cx + self.half).min(self.dims.width as i64 - 1) as usize;
        let y1 = (self.cy + self.half).min(self.dims.height as i64 - 1) as usize;
        (x0, y0, x1, y1)
    }
}

/// Splits frontiers into those inside and outside the window.
pub fn window_filter(
    frontiers: &FrontierSet,
    dims: Dims,
    cell_size: f64,
    center: CellIndex,
    window_m: f64,
) -> (FrontierSet, FrontierSet) {
    let w = Window::new(dims, cell_size, center, window_m);
    let (inside, outside): (Vec<_>, Vec<_>) = frontiers.cells.iter().partition(|&&c| w.contains(c));
    (
        FrontierSet {
            cells: inside,
            map_version: frontiers.map_version,
        },
        FrontierSet {
            cells: outside,
            map_version: frontiers.map_version,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fully_known_map_has_no_frontiers() {
        let dims = Dims::new(4, 4);
        let map = KnownMap::from_states(dims, 0.25, vec![CellState::Free; 16]);
        assert!(detect_frontiers(&map).is_empty());
    }

    #[test]
    fn isolated_free_cell_is_a_frontier() {
        let dims = Dims::new(3, 3);
        let mut states = vec![CellState::Unknown; 9];
        states[4] = CellState::Free;
        let map = KnownMap::from_states(dims, 0.25, states);
        assert_eq!(detect_frontiers(&map).cells, vec![4]);
    }

    #[test]
    fn diagonal_unknown_does_not_count() {
        let dims = Dims::new(2, 2);
        let states = vec![CellState::Free, CellState::Free, CellState::Free, CellState::Unknown];
        let map = KnownMap::from_states(dims, 0.25, states);
        assert_eq!(detect_frontiers(&map).cells, vec![1, 2]);
    }

    #[test]
    fn window_contains_near_frontiers() {
        let dims = Dims::new(200, 200);
        let center = dims.index(100, 100);
        let cells: Vec<_> = (0..8).map(|i| dims.index(95 + i, 100 + i % 3)).collect();
        let set = FrontierSet::new(cells.clone(), 0);
        let (inside, outside) = window_filter(&set, dims, 0.25, center, 30.0);
        assert!(outside.is_empty());
        assert_eq!(inside.cells, set.cells);
    }

    #[test]
    fn window_edge_is_inside() {
        let dims = Dims::new(200, 200);
        let center = dims.index(100, 100);
        let edge = dims.index(160, 40); // exactly 15 m away on both axes
        let beyond = dims.index(161, 100);
        let set = FrontierSet::new(vec![edge, beyond], 0);
        let (inside, outside) = window_filter(&set, dims, 0.25, center, 30.0);
        assert_eq!(inside.cells, vec![edge]);
        assert_eq!(outside.cells, vec![beyond]);
    }
}
