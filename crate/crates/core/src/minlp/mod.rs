//! The full mixed-integer problem, solved by enumerating the discrete
//! choices and reducing per-assignment continuous solves.
//!
//! [`Engine`] owns one scenario. For every assignment that survives the
//! interval presolve it lazily caches two unconstrained solves: minimum
//! embodied energy and minimum cost. A query with side constraints visits
//! assignments best-first by lower bound, answers from the cache when a
//! cached design already meets the constraints, and runs a constrained
//! solve (warm-started from both cached designs) otherwise.

pub mod enumerate;
mod foundation;
mod scenario;

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    cost, derive_state, embodied_energy, AssignmentKey, BuildingParams, ContinuousPoint,
    DerivedState, DiscreteAssignment, MaterialTuple,
};
use crate::nlp::{
    solve_continuous, solve_continuous_from, ContinuousProblem, Objective, SideConstraint,
    SolveReport,
};

pub use enumerate::{enumerate_discrete, objective_bounds, presolve, ObjectiveBounds};
pub use foundation::{min_feasible_foundation_width, FoundationWidth};
pub use scenario::{Rule, ScenarioConfig, ScenarioError, ScenarioSpec};

pub const SOLVER_VERSION: &str = concat!("rebuild-core ", env!("CARGO_PKG_VERSION"));

/// Assignments visited per parallel batch of the best-first search. Fixed so
/// the visiting order, and hence the result, does not depend on threads.
const BATCH: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub starts: u32,
    pub solver_version: String,
}

/// A feasible building: discrete choices, dimensions and everything derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub assign: DiscreteAssignment,
    pub point: ContinuousPoint,
    /// foundation width (m)
    pub b_fo: f64,
    pub state: DerivedState,
    /// USD
    pub cost: f64,
    /// GJ
    pub ee: f64,
    pub max_residual: f64,
    pub provenance: Provenance,
}

impl Design {
    /// Builds a design by evaluating the model at `point`.
    pub fn evaluate(
        params: &BuildingParams,
        assign: &DiscreteAssignment,
        point: &ContinuousPoint,
        max_residual: f64,
        provenance: Provenance,
    ) -> Design {
        let state = derive_state(params, assign, point);
        Design {
            assign: assign.clone(),
            point: *point,
            b_fo: params.foundation_width,
            cost: cost(params, assign, &state),
            ee: embodied_energy(params, assign, &state) / 1000.0,
            state,
            max_residual,
            provenance,
        }
    }

    fn from_report(params: &BuildingParams, assign: &DiscreteAssignment, r: &SolveReport) -> Design {
        let mut p = *params;
        p.foundation_width = r.b_fo;
        Design::evaluate(
            &p,
            assign,
            &r.point,
            r.max_residual,
            Provenance {
                seed: r.seed,
                starts: r.starts_used,
                solver_version: SOLVER_VERSION.to_string(),
            },
        )
    }

    pub fn key(&self) -> AssignmentKey {
        self.assign.key()
    }

    pub fn material_tuple(&self) -> MaterialTuple {
        self.assign.material_tuple()
    }

    /// Volume (m³) of the named material in this design, summed over every
    /// component that uses it.
    pub fn volume_of(&self, name: &str) -> f64 {
        let a = &self.assign;
        let s = &self.state;
        [
            (&a.wall.name, s.v_wa_tot),
            (&a.foundation.name, s.v_fo_tot),
            (&a.roof.name, s.v_slc_tot),
            (&a.cover.name, s.v_co_tot),
        ]
        .into_iter()
        .filter(|(n, _)| n.as_str() == name)
        .map(|(_, v)| v)
        .sum()
    }

    pub fn uses(&self, name: &str) -> bool {
        self.assign.material_tuple().iter().any(|n| n == name)
    }
}

/// Which objective a query minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    MinEnergy,
    MinCost,
}

/// One mixed-integer query: an objective and optional side constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub goal: Goal,
    /// USD
    pub budget: Option<f64>,
    /// GJ
    pub energy_cap: Option<f64>,
    /// m² per room
    pub min_floor_area: Option<f64>,
}

impl Query {
    /// Minimum embodied energy within a budget (unbounded when `None`).
    pub fn min_energy(budget: Option<f64>) -> Self {
        Query {
            goal: Goal::MinEnergy,
            budget,
            energy_cap: None,
            min_floor_area: None,
        }
    }

    /// Minimum cost with embodied energy capped (unbounded when `None`).
    pub fn min_cost(energy_cap: Option<f64>) -> Self {
        Query {
            goal: Goal::MinCost,
            budget: None,
            energy_cap,
            min_floor_area: None,
        }
    }

    pub fn with_floor_area(mut self, area: f64) -> Self {
        self.min_floor_area = Some(area);
        self
    }

    fn sides(&self) -> Vec<SideConstraint> {
        let mut s = Vec::new();
        if let Some(b) = self.budget {
            s.push(SideConstraint::CostAtMost(b));
        }
        if let Some(e) = self.energy_cap {
            s.push(SideConstraint::EnergyAtMost(e));
        }
        if let Some(a) = self.min_floor_area {
            s.push(SideConstraint::FloorAreaAtLeast(a));
        }
        s
    }

    /// Whether a design meets the side constraints within tolerance.
    fn admits(&self, d: &Design, tol: f64) -> bool {
        let slack = |bound: f64| tol * bound.abs().max(1.0);
        self.budget.is_none_or(|b| d.cost - b <= slack(b))
            && self.energy_cap.is_none_or(|e| d.ee - e <= slack(e))
            && self
                .min_floor_area
                .is_none_or(|a| a - d.point.floor_area() <= slack(a))
    }

    fn primary(&self, d: &Design) -> f64 {
        match self.goal {
            Goal::MinEnergy => d.ee,
            Goal::MinCost => d.cost,
        }
    }

    fn secondary(&self, d: &Design) -> f64 {
        match self.goal {
            Goal::MinEnergy => d.cost,
            Goal::MinCost => d.ee,
        }
    }

    /// Total order on designs: primary objective, secondary objective,
    /// assignment key.
    fn compare(&self, a: &Design, b: &Design) -> Ordering {
        self.primary(a)
            .total_cmp(&self.primary(b))
            .then(self.secondary(a).total_cmp(&self.secondary(b)))
            .then_with(|| a.key().cmp(&b.key()))
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum MinlpError {
    #[error("infeasible: {0}")]
    Infeasible(String),
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    key: f64,
    index: usize,
    /// the key is the cached unconstrained optimum, not the interval bound
    anchored: bool,
}

impl PartialEq for Pending {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Pending {
    fn cmp(&self, o: &Self) -> Ordering {
        self.key
            .total_cmp(&o.key)
            .then(self.index.cmp(&o.index))
            .then(self.anchored.cmp(&o.anchored))
    }
}

enum Step {
    Found(Box<Design>),
    Requeue(Pending),
    Dropped,
}

struct Entry {
    assign: DiscreteAssignment,
    bounds: ObjectiveBounds,
    min_energy: OnceLock<Option<Design>>,
    min_cost: OnceLock<Option<Design>>,
}

/// Per-scenario solver with its assignment cache.
pub struct Engine {
    scenario: ScenarioConfig,
    fingerprint: String,
    enumerated: usize,
    entries: Vec<Entry>,
}

impl Engine {
    pub fn new(scenario: ScenarioConfig) -> Engine {
        let all = scenario.enumerate();
        let enumerated = all.len();
        let p = &scenario.params;
        let b = p.foundation_width;
        let tol = scenario.solver.tolerance;
        let entries = all
            .into_iter()
            .filter(|a| presolve(p, a, b, b, tol))
            .map(|assign| Entry {
                bounds: objective_bounds(p, &assign),
                assign,
                min_energy: OnceLock::new(),
                min_cost: OnceLock::new(),
            })
            .collect();
        Engine {
            fingerprint: scenario.fingerprint(),
            scenario,
            enumerated,
            entries,
        }
    }

    pub fn scenario(&self) -> &ScenarioConfig {
        &self.scenario
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Assignments before presolve.
    pub fn enumerated(&self) -> usize {
        self.enumerated
    }

    /// Assignments that survive the interval presolve, in enumeration order.
    pub fn assignments(&self) -> impl Iterator<Item = (&DiscreteAssignment, ObjectiveBounds)> {
        self.entries.iter().map(|e| (&e.assign, e.bounds))
    }

    /// Number of assignments whose unconstrained solves are cached.
    pub fn cached(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.min_energy.get().is_some() || e.min_cost.get().is_some())
            .count()
    }

    fn anchor(&self, i: usize, goal: Goal) -> Option<&Design> {
        let e = &self.entries[i];
        let (cell, objective) = match goal {
            Goal::MinEnergy => (&e.min_energy, Objective::MinEmbodiedEnergy),
            Goal::MinCost => (&e.min_cost, Objective::MinCost),
        };
        cell.get_or_init(|| {
            let problem = ContinuousProblem::new(self.scenario.params, e.assign.clone(), objective);
            let r = solve_continuous(&problem, &self.scenario.solver);
            r.status
                .is_feasible()
                .then(|| Design::from_report(&self.scenario.params, &e.assign, &r))
        })
        .as_ref()
    }

    /// Unconstrained minimum of `goal` for one presolved assignment.
    pub fn unconstrained(&self, assign: &DiscreteAssignment, goal: Goal) -> Option<&Design> {
        let i = self.entries.iter().position(|e| e.assign == *assign)?;
        self.anchor(i, goal)
    }

    fn lower_bound(&self, i: usize, goal: Goal) -> f64 {
        let b = self.entries[i].bounds;
        match goal {
            Goal::MinEnergy => b.ee,
            Goal::MinCost => b.cost,
        }
    }

    /// True when the price and energy bounds alone rule the assignment out.
    fn bound_pruned(&self, i: usize, q: &Query) -> bool {
        let tol = self.scenario.solver.tolerance;
        let b = self.entries[i].bounds;
        q.budget.is_some_and(|x| b.cost > x + tol * x.abs().max(1.0))
            || q.energy_cap.is_some_and(|x| b.ee > x + tol * x.abs().max(1.0))
    }

    /// Presolved assignments that the bound test removes for `q`.
    pub fn pruned(&self, q: &Query) -> Vec<&DiscreteAssignment> {
        (0..self.entries.len())
            .filter(|&i| self.bound_pruned(i, q))
            .map(|i| &self.entries[i].assign)
            .collect()
    }

    /// The per-assignment answer to `q` once the goal's anchor is known:
    /// the anchor itself when it meets the side constraints, otherwise a
    /// constrained solve seeded with both anchors.
    fn refine(&self, i: usize, q: &Query, anchor: &Design) -> Option<Design> {
        let tol = self.scenario.solver.tolerance;
        if q.admits(anchor, tol) {
            return Some(anchor.clone());
        }
        let other_goal = match q.goal {
            Goal::MinEnergy => Goal::MinCost,
            Goal::MinCost => Goal::MinEnergy,
        };
        let other = self.anchor(i, other_goal)?;
        // the other anchor minimizes what the side constraint caps
        let hopeless = match q.goal {
            Goal::MinEnergy => q
                .budget
                .is_some_and(|b| other.cost - b > tol * b.abs().max(1.0)),
            Goal::MinCost => q
                .energy_cap
                .is_some_and(|e| other.ee - e > tol * e.abs().max(1.0)),
        };
        if hopeless {
            return None;
        }
        let e = &self.entries[i];
        let objective = match q.goal {
            Goal::MinEnergy => Objective::MinEmbodiedEnergy,
            Goal::MinCost => Objective::MinCost,
        };
        let mut problem = ContinuousProblem::new(self.scenario.params, e.assign.clone(), objective);
        problem.side = q.sides();
        let hints = [(anchor.point, anchor.b_fo), (other.point, other.b_fo)];
        let r = solve_continuous_from(&problem, &self.scenario.solver, &hints);
        r.status
            .is_feasible()
            .then(|| Design::from_report(&self.scenario.params, &e.assign, &r))
    }

    fn value(&self, i: usize, q: &Query) -> Option<Design> {
        let anchor = self.anchor(i, q.goal)?.clone();
        self.refine(i, q, &anchor)
    }

    fn infeasible(&self, q: &Query, candidates: usize) -> MinlpError {
        let msg = if self.entries.is_empty() {
            format!(
                "none of the {} assignments passes the interval presolve (roof span, eccentricity window, thickness limits)",
                self.enumerated
            )
        } else if candidates == 0 {
            let floor = (0..self.entries.len())
                .map(|i| match q.goal {
                    Goal::MinEnergy => self.entries[i].bounds.cost,
                    Goal::MinCost => self.entries[i].bounds.ee,
                })
                .fold(f64::INFINITY, f64::min);
            match q.goal {
                Goal::MinEnergy => format!(
                    "budget {} USD is below the lowest price bound {:.0} USD",
                    q.budget.unwrap_or(f64::INFINITY),
                    floor
                ),
                Goal::MinCost => format!(
                    "energy cap {} GJ is below the lowest energy bound {:.1} GJ",
                    q.energy_cap.unwrap_or(f64::INFINITY),
                    floor
                ),
            }
        } else {
            format!("no assignment admits a feasible point among {candidates} candidates")
        };
        MinlpError::Infeasible(msg)
    }

    /// Best design for `q` over every assignment.
    ///
    /// Best-first search: every candidate sits in a queue keyed by a lower
    /// bound on its objective, first the interval bound, then the cached
    /// unconstrained optimum. Batches are popped in key order until the
    /// smallest key exceeds the incumbent.
    pub fn solve(&self, q: &Query) -> Result<Design, MinlpError> {
        let goal = q.goal;
        let tol = self.scenario.solver.tolerance;
        let mut queue: BinaryHeap<Reverse<Pending>> = (0..self.entries.len())
            .filter(|&i| !self.bound_pruned(i, q))
            .map(|i| {
                Reverse(Pending {
                    key: self.lower_bound(i, goal),
                    index: i,
                    anchored: false,
                })
            })
            .collect();
        let n_candidates = queue.len();
        let mut best: Option<Design> = None;
        loop {
            let cut = best.as_ref().map_or(f64::INFINITY, |b| q.primary(b));
            let mut batch = Vec::with_capacity(BATCH);
            while batch.len() < BATCH {
                match queue.peek() {
                    Some(Reverse(p)) if p.key <= cut => batch.push(queue.pop().expect("peeked").0),
                    _ => break,
                }
            }
            if batch.is_empty() {
                break;
            }
            let steps: Vec<Step> = batch
                .par_iter()
                .map(|p| {
                    if p.anchored {
                        let anchor = self.anchor(p.index, goal).expect("anchored entries are feasible");
                        return match self.refine(p.index, q, anchor) {
                            Some(d) => Step::Found(Box::new(d)),
                            None => Step::Dropped,
                        };
                    }
                    match self.anchor(p.index, goal) {
                        None => Step::Dropped,
                        Some(a) if q.admits(a, tol) => Step::Found(Box::new(a.clone())),
                        Some(a) => Step::Requeue(Pending {
                            key: q.primary(a),
                            index: p.index,
                            anchored: true,
                        }),
                    }
                })
                .collect();
            for step in steps {
                match step {
                    Step::Found(d) => {
                        if best.as_ref().is_none_or(|b| q.compare(&d, b) == Ordering::Less) {
                            best = Some(*d);
                        }
                    }
                    Step::Requeue(p) => queue.push(Reverse(p)),
                    Step::Dropped => {}
                }
            }
        }
        best.ok_or_else(|| self.infeasible(q, n_candidates))
    }

    /// Same answer as [`solve`](Self::solve) by evaluating every candidate
    /// in enumeration order on the calling thread.
    pub fn solve_exhaustive(&self, q: &Query) -> Result<Design, MinlpError> {
        let mut best: Option<Design> = None;
        let mut n = 0;
        for i in 0..self.entries.len() {
            if self.bound_pruned(i, q) {
                continue;
            }
            n += 1;
            if let Some(d) = self.value(i, q) {
                if best.as_ref().is_none_or(|b| q.compare(&d, b) == Ordering::Less) {
                    best = Some(d);
                }
            }
        }
        best.ok_or_else(|| self.infeasible(q, n))
    }

    /// Minimum embodied energy within `budget` (USD; unbounded when `None`).
    pub fn solve_minlp(&self, budget: Option<f64>) -> Result<Design, MinlpError> {
        self.solve(&Query::min_energy(budget))
    }
}

/// One-shot form of [`Engine::solve_minlp`].
pub fn solve_minlp(scenario: &ScenarioConfig, budget: Option<f64>) -> Result<Design, MinlpError> {
    Engine::new(scenario.clone()).solve_minlp(budget)
}
