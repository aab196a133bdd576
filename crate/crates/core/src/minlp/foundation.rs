//! Smallest foundation width at which a wall material admits any design.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::DiscreteAssignment;
use crate::nlp::{solve_continuous, ContinuousProblem, Objective, MAX_FOUNDATION_WIDTH};

use super::{presolve, objective_bounds, Design, Rule, ScenarioConfig, ScenarioError, BATCH};

/// Bisection resolution (m).
pub const WIDTH_RESOLUTION: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoundationWidth {
    pub wall: String,
    /// smallest feasible width found; `None` when even the upper end fails
    pub width: Option<f64>,
    /// largest width shown infeasible
    pub infeasible_below: f64,
    /// a feasible design at `width`
    pub witness: Option<Design>,
    pub probes: u32,
}

/// First feasible assignment at width `b`, visiting cheapest bound first.
fn probe(
    scenario: &ScenarioConfig,
    assigns: &[DiscreteAssignment],
    b: f64,
) -> Option<Design> {
    let mut params = scenario.params;
    params.foundation_width = b;
    let tol = scenario.solver.tolerance;
    let mut live: Vec<(f64, &DiscreteAssignment)> = assigns
        .iter()
        .filter(|a| presolve(&params, a, b, b, tol))
        .map(|a| (objective_bounds(&params, a).cost, a))
        .collect();
    live.sort_by(|x, y| x.0.total_cmp(&y.0).then_with(|| x.1.key().cmp(&y.1.key())));
    for chunk in live.chunks(BATCH) {
        let found: Vec<Option<Design>> = chunk
            .par_iter()
            .map(|(_, a)| {
                let problem = ContinuousProblem::new(params, (*a).clone(), Objective::Feasibility);
                let r = solve_continuous(&problem, &scenario.solver);
                r.status
                    .is_feasible()
                    .then(|| Design::from_report(&params, a, &r))
            })
            .collect();
        if let Some(d) = found.into_iter().flatten().next() {
            return Some(d);
        }
    }
    None
}

/// Bisection on the foundation width over `[2·t_fo_min, 2.0]` m with the
/// wall material fixed and every other discrete choice free. An
/// assignment counts as feasible at a width when the feasibility solve
/// finds a point meeting every constraint.
pub fn min_feasible_foundation_width(
    scenario: &ScenarioConfig,
    wall: &str,
) -> Result<FoundationWidth, ScenarioError> {
    let fixed = scenario
        .clone()
        .with_rules([Rule::FixWallMaterial(wall.to_string())])?;
    let assigns = fixed.enumerate();
    let t_min = assigns
        .iter()
        .map(|a| a.foundation.min_thickness_or_zero())
        .fold(f64::INFINITY, f64::min);
    let mut lo = (2.0 * t_min).max(1e-3);
    let mut hi = MAX_FOUNDATION_WIDTH;
    let mut probes = 1;
    let Some(mut witness) = probe(&fixed, &assigns, hi) else {
        return Ok(FoundationWidth {
            wall: wall.to_string(),
            width: None,
            infeasible_below: hi,
            witness: None,
            probes,
        });
    };
    probes += 1;
    if let Some(d) = probe(&fixed, &assigns, lo) {
        return Ok(FoundationWidth {
            wall: wall.to_string(),
            width: Some(lo),
            infeasible_below: lo,
            witness: Some(d),
            probes,
        });
    }
    while hi - lo > WIDTH_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        probes += 1;
        match probe(&fixed, &assigns, mid) {
            Some(d) => {
                hi = mid;
                witness = d;
            }
            None => lo = mid,
        }
    }
    Ok(FoundationWidth {
        wall: wall.to_string(),
        width: Some(hi),
        infeasible_below: lo,
        witness: Some(witness),
        probes,
    })
}
