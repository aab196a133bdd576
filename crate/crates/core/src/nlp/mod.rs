//! Continuous subproblem for one fixed discrete assignment.
//!
//! [`solve_continuous`] runs a multistart local search: low-discrepancy
//! starts, an augmented-Lagrangian outer loop with a projected quasi-Newton
//! inner solve and a final feasibility projection. [`grid_oracle`] is the
//! brute-force cross-check used by the tests.

mod halton;
mod local;
mod oracle;
mod problem;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{BuildingParams, ContinuousPoint, DiscreteAssignment};

pub use halton::halton;
pub use oracle::{grid_oracle, grid_oracle_with, tightened_bounds, GridOptions};
pub use problem::{ContinuousProblem, Objective, SideConstraint, MAX_FOUNDATION_WIDTH};

pub(crate) use problem::Evaluator;

/// Tuning knobs of [`solve_continuous`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// multistart count
    pub starts: u32,
    /// relative feasibility tolerance
    pub tolerance: f64,
    pub seed: u64,
    /// inner quasi-Newton iterations per penalty stage
    pub max_iterations: u32,
    /// penalty stages per start
    pub max_outer: u32,
    pub initial_penalty: f64,
    pub penalty_growth: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            starts: 32,
            tolerance: 1e-6,
            seed: 0,
            max_iterations: 200,
            max_outer: 40,
            initial_penalty: 10.0,
            penalty_growth: 10.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.starts == 0 {
            return Err("starts must be at least 1".into());
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.max_iterations == 0 || self.max_outer == 0 {
            return Err("iteration limits must be at least 1".into());
        }
        if !(self.initial_penalty > 0.0 && self.penalty_growth > 1.0) {
            return Err("penalty must be positive and grow by a factor above 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    OptimalLocal,
    Feasible,
    Infeasible,
    NumericFailure,
}

impl SolveStatus {
    pub fn is_feasible(self) -> bool {
        matches!(self, SolveStatus::OptimalLocal | SolveStatus::Feasible)
    }
}

/// Constraint violation of the accepted iterate after each penalty stage of
/// one start, alongside the penalty weight used for that stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PenaltyTrace {
    pub penalties: Vec<f64>,
    pub violations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub point: ContinuousPoint,
    /// foundation width the point was evaluated with
    pub b_fo: f64,
    /// GJ for embodied energy, USD for cost, m² for floor area, m for width
    pub objective_value: f64,
    pub cost: f64,
    /// GJ
    pub ee: f64,
    /// largest residual relative to its scale (negative means slack)
    pub max_residual: f64,
    pub starts_used: u32,
    pub seed: u64,
    #[serde(skip)]
    pub traces: Vec<PenaltyTrace>,
}

/// Deterministic per-problem seed: a digest of the assignment, the objective
/// and the side constraints, mixed with the configured seed.
pub fn problem_seed(problem: &ContinuousProblem, base: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(problem.assign.key().to_string().as_bytes());
    h.update(format!("{:?}", problem.objective).as_bytes());
    for s in &problem.side {
        h.update(format!("{s:?}").as_bytes());
    }
    let d = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&d[..8]);
    u64::from_le_bytes(b) ^ base.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Multistart local minimization of `problem`.
pub fn solve_continuous(problem: &ContinuousProblem, config: &SolverConfig) -> SolveReport {
    solve_continuous_from(problem, config, &[])
}

/// As [`solve_continuous`], with extra starting points tried before the
/// low-discrepancy starts.
pub fn solve_continuous_from(
    problem: &ContinuousProblem,
    config: &SolverConfig,
    hints: &[(ContinuousPoint, f64)],
) -> SolveReport {
    let seed = problem_seed(problem, config.seed);
    let ev = Evaluator::new(problem);
    local::multistart(&ev, config, seed, hints)
}

/// True iff some point of the assignment's box satisfies every constraint.
pub fn feasibility_probe(params: &BuildingParams, assign: &DiscreteAssignment) -> bool {
    feasibility_probe_with(params, assign, &SolverConfig::default())
}

pub fn feasibility_probe_with(
    params: &BuildingParams,
    assign: &DiscreteAssignment,
    config: &SolverConfig,
) -> bool {
    let problem = ContinuousProblem::new(*params, assign.clone(), Objective::Feasibility);
    solve_continuous(&problem, config).status.is_feasible()
}
