use crate::frontier::FrontierSet;
use crate::nav::DistanceField;

use super::{Decision, PlanError};

/// The reachable frontier closest to the robot; ties go to the lowest index.
/// The objective is the negated distance.
pub fn plan_nearest_frontier(robot_field: &DistanceField, frontiers: &FrontierSet) -> Result<Decision, PlanError> {
    let mut best: Option<(usize, f64)> = None;
    for &f in &frontiers.cells {
        let d = robot_field.get(f);
        if d.is_finite() && best.map_or(true, |(_, bd)| d < bd) {
            best = Some((f, d));
        }
    }
    let (target, d) = best.ok_or(PlanError::NoReachableFrontier)?;
    Ok(Decision {
        target,
        objective_value: -d,
        used_fallback: false,
    })
}
