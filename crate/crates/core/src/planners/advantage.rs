use crate::frontier::FrontierSet;
use crate::grid::CellIndex;
use crate::nav::{DistanceField, PaddedGrid};
use crate::predictor::PlanningMap;

use super::{Decision, PlanError};

/// A candidate is skipped once its upper bound falls this far below the
/// best objective found so far.
const PRUNE_MARGIN: f64 = 1e-6;

/// Work done by one distance-advantage decision.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AdvantageStats {
    pub candidates: usize,
    pub evaluated: usize,
    pub region_cells: usize,
}

/// Picks the window frontier that leaves the robot closest, on average, to
/// the rest of the reachable window.
///
/// Inside the window, over cells traversable on the planning map, let R be
/// the cells reachable from the robot. For a candidate frontier t the
/// objective is `mean_{s in R} d(t, s) - d(robot, t)`; the maximum wins and
/// ties go to the lowest index. Candidates must also be reachable on the
/// known map (`known_field`), since the robot only drives on known space.
///
/// Candidates are scored in order of an upper bound from the triangle
/// inequality, `mean(e) + d(e, t) >= mean(t)` for any scored e, and the
/// search stops once no bound can beat the best score.
///
/// With no usable candidate the nearest known-reachable frontier outside
/// the window is returned, then any known-reachable frontier.
pub fn plan_distance_advantage(
    planning: &PlanningMap,
    robot: CellIndex,
    inside: &FrontierSet,
    outside: &FrontierSet,
    known_field: &DistanceField,
) -> Result<(Decision, AdvantageStats), PlanError> {
    let map = planning.base();
    let dims = map.dims();
    let cs = map.cell_size();
    let mut grid = PaddedGrid::new(dims, planning.window.bounds(), &|c| planning.is_traversable(c));
    let robot_slot = grid.slot(dims, robot).ok_or(PlanError::NoReachableFrontier)?;
    let mut d_robot = Vec::new();
    grid.search(cs, &[robot_slot], &mut d_robot);
    let region: Vec<usize> = (0..grid.slots()).filter(|&s| d_robot[s].is_finite()).collect();

    let candidates: Vec<(CellIndex, usize)> = inside
        .cells
        .iter()
        .filter(|&&f| known_field.is_reachable(f))
        .filter_map(|&f| grid.slot(dims, f).map(|s| (f, s)))
        .filter(|&(_, s)| d_robot[s].is_finite())
        .collect();
    let mut stats = AdvantageStats {
        candidates: candidates.len(),
        evaluated: 0,
        region_cells: region.len(),
    };
    if candidates.is_empty() {
        return fallback(inside, outside, known_field).map(|d| (d, stats));
    }

    let n = region.len() as f64;
    let mut bound = vec![f64::INFINITY; candidates.len()];
    let mut done = vec![false; candidates.len()];
    let mut best: Option<(usize, f64)> = None;
    let mut dist = Vec::new();
    loop {
        // Highest remaining bound, lowest index on ties.
        let mut pick: Option<usize> = None;
        for i in 0..candidates.len() {
            if !done[i] && pick.map_or(true, |p| bound[i] > bound[p]) {
                pick = Some(i);
            }
        }
        let Some(i) = pick else { break };
        if let Some((_, b)) = best {
            if bound[i] + PRUNE_MARGIN < b {
                break;
            }
        }
        done[i] = true;
        let (_, slot) = candidates[i];
        grid.search(cs, &[slot], &mut dist);
        stats.evaluated += 1;
        let mut sum = 0.0;
        for &s in &region {
            sum += dist[s];
        }
        let mean = sum / n;
        let obj = mean - d_robot[slot];
        let better = match best {
            None => true,
            Some((bi, bo)) => obj > bo || (obj == bo && i < bi),
        };
        if better {
            best = Some((i, obj));
        }
        for (j, &(_, sj)) in candidates.iter().enumerate() {
            if !done[j] {
                bound[j] = bound[j].min(mean + dist[sj] - d_robot[sj]);
            }
        }
    }
    let (i, objective_value) = best.expect("at least one candidate scored");
    Ok((
        Decision {
            target: candidates[i].0,
            objective_value,
            used_fallback: false,
        },
        stats,
    ))
}

fn fallback(inside: &FrontierSet, outside: &FrontierSet, known_field: &DistanceField) -> Result<Decision, PlanError> {
    let nearest = |set: &FrontierSet| {
        let mut best: Option<(CellIndex, f64)> = None;
        for &f in &set.cells {
            let d = known_field.get(f);
            if d.is_finite() && best.map_or(true, |(_, bd)| d < bd) {
                best = Some((f, d));
            }
        }
        best
    };
    let (target, d) = nearest(outside)
        .or_else(|| nearest(inside))
        .ok_or(PlanError::NoReachableFrontier)?;
    Ok(Decision {
        target,
        objective_value: -d,
        used_fallback: true,
    })
}
