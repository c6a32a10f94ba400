//! Row-major grid geometry shared by every module.
//!
//! Cells are addressed by a flat index `y * width + x`, with `x` growing
//! east (columns) and `y` growing south (text rows). Lowest index is the
//! global tie-break used throughout the crate.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// Flat row-major cell index.
pub type CellIndex = usize;

/// Grid extent in cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub width: usize,
    pub height: usize,
}

/// One of the eight grid moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Move {
    pub dx: i64,
    pub dy: i64,
}

impl Move {
    pub fn is_diagonal(self) -> bool {
        self.dx != 0 && self.dy != 0
    }

    /// Metric length of the move for a given cell edge length.
    pub fn length(self, cell_size: f64) -> f64 {
        if self.is_diagonal() {
            cell_size * std::f64::consts::SQRT_2
        } else {
            cell_size
        }
    }
}

/// Axis moves first, then diagonals; the order is part of the determinism
/// contract of the search routines.
pub const MOVES: [Move; 8] = [
    Move { dx: 1, dy: 0 },
    Move { dx: -1, dy: 0 },
    Move { dx: 0, dy: 1 },
    Move { dx: 0, dy: -1 },
    Move { dx: 1, dy: 1 },
    Move { dx: 1, dy: -1 },
    Move { dx: -1, dy: 1 },
    Move { dx: -1, dy: -1 },
];

/// The four von Neumann neighbours.
pub const AXIS_MOVES: [Move; 4] = [MOVES[0], MOVES[1], MOVES[2], MOVES[3]];

impl Dims {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, x: usize, y: usize) -> CellIndex {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    pub fn coords(&self, cell: CellIndex) -> (usize, usize) {
        (cell % self.width, cell / self.width)
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    /// Index of `(x, y)` if it lies on the grid.
    pub fn checked_index(&self, x: i64, y: i64) -> Option<CellIndex> {
        self.contains(x, y).then(|| y as usize * self.width + x as usize)
    }

    /// Neighbour of `cell` along `mv`, if on the grid.
    pub fn step(&self, cell: CellIndex, mv: Move) -> Option<CellIndex> {
        let (x, y) = self.coords(cell);
        self.checked_index(x as i64 + mv.dx, y as i64 + mv.dy)
    }

    pub fn is_boundary(&self, cell: CellIndex) -> bool {
        let (x, y) = self.coords(cell);
        x == 0 || y == 0 || x + 1 == self.width || y + 1 == self.height
    }

    /// Calls `f(neighbour, move)` for every move a point robot may take from
    /// `cell` when only cells satisfying `passable` may be entered.
    ///
    /// A diagonal move is refused when both orthogonal cells it sweeps past
    /// are impassable.
    #[inline]
    pub fn for_each_move<P, F>(&self, cell: CellIndex, passable: &P, mut f: F)
    where
        P: Fn(CellIndex) -> bool + ?Sized,
        F: FnMut(CellIndex, Move),
    {
        let (x, y) = self.coords(cell);
        let (x, y) = (x as i64, y as i64);
        for mv in MOVES {
            let Some(next) = self.checked_index(x + mv.dx, y + mv.dy) else {
                continue;
            };
            if !passable(next) {
                continue;
            }
            if mv.is_diagonal() {
                let side_a = self.checked_index(x + mv.dx, y).is_some_and(passable);
                let side_b = self.checked_index(x, y + mv.dy).is_some_and(passable);
                if !side_a && !side_b {
                    continue;
                }
            }
            f(next, mv);
        }
    }
}

/// Breadth-first reachability under the robot's move rules.
///
/// Returns a mask of the cells reachable from any of `seeds`; seeds that are
/// not passable are ignored.
pub fn flood_fill<P>(dims: Dims, passable: &P, seeds: &[CellIndex]) -> Vec<bool>
where
    P: Fn(CellIndex) -> bool + ?Sized,
{
    let mut seen = vec![false; dims.len()];
    let mut queue = VecDeque::new();
    for &s in seeds {
        if passable(s) && !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(cell) = queue.pop_front() {
        dims.for_each_move(cell, passable, |next, _| {
            if !seen[next] {
                seen[next] = true;
                queue.push_back(next);
            }
        });
    }
    seen
}

/// Labels connected components of passable cells; returns `(labels, count)`
/// with `usize::MAX` on impassable cells. Components are numbered in order
/// of their lowest cell index.
pub fn components<P>(dims: Dims, passable: &P) -> (Vec<usize>, usize)
where
    P: Fn(CellIndex) -> bool + ?Sized,
{
    let mut label = vec![usize::MAX; dims.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..dims.len() {
        if label[start] != usize::MAX || !passable(start) {
            continue;
        }
        label[start] = count;
        queue.push_back(start);
        while let Some(cell) = queue.pop_front() {
            dims.for_each_move(cell, passable, |next, _| {
                if label[next] == usize::MAX {
                    label[next] = count;
                    queue.push_back(next);
                }
            });
        }
        count += 1;
    }
    (label, count)
}
