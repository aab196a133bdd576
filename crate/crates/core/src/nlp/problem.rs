use serde::{Deserialize, Serialize};

use crate::model::{
    core_residuals, constraint_scales, cost, derive_state, embodied_energy, BoundBox,
    BuildingParams, ContinuousPoint, DerivedState, DiscreteAssignment, DIMENSIONS, N_CORE,
};

/// Upper end of the foundation-width search dimension (m).
pub const MAX_FOUNDATION_WIDTH: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MinEmbodiedEnergy,
    MinCost,
    MaxFloorArea,
    /// foundation width becomes an eighth search dimension
    MinFoundationWidth,
    /// any feasible point
    Feasibility,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideConstraint {
    /// USD
    CostAtMost(f64),
    /// GJ
    EnergyAtMost(f64),
    /// m² per room
    FloorAreaAtLeast(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousProblem {
    pub params: BuildingParams,
    pub assign: DiscreteAssignment,
    pub objective: Objective,
    pub side: Vec<SideConstraint>,
}

impl ContinuousProblem {
    pub fn new(params: BuildingParams, assign: DiscreteAssignment, objective: Objective) -> Self {
        ContinuousProblem {
            params,
            assign,
            objective,
            side: Vec::new(),
        }
    }

    pub fn with_side(mut self, side: SideConstraint) -> Self {
        self.side.push(side);
        self
    }

    pub fn dimension(&self) -> usize {
        if self.objective == Objective::MinFoundationWidth {
            DIMENSIONS + 1
        } else {
            DIMENSIONS
        }
    }

    /// Lower and upper limits of every search dimension.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let bb = BoundBox::new(&self.params, &self.assign);
        let mut lo = bb.lower.to_vec();
        let mut hi = bb.upper.to_vec();
        if self.objective == Objective::MinFoundationWidth {
            hi[4] = 0.5 * MAX_FOUNDATION_WIDTH;
            let t_min = self.assign.foundation.min_thickness_or_zero();
            lo.push((2.0 * t_min).max(1e-3));
            hi.push(MAX_FOUNDATION_WIDTH);
        }
        (lo, hi)
    }
}

/// One full evaluation of a search point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Outcome {
    pub point: ContinuousPoint,
    pub b_fo: f64,
    pub cost: f64,
    /// MJ
    pub ee: f64,
    /// objective in solver sense (smaller is better), natural units
    pub objective: f64,
    pub max_residual: f64,
}

/// Maps the unit cube onto the problem box and evaluates objective and
/// scaled residuals.
pub(crate) struct Evaluator<'a> {
    pub problem: &'a ContinuousProblem,
    pub dim: usize,
    pub lo: [f64; 8],
    pub span: [f64; 8],
    /// number of residuals
    pub m: usize,
    scales: [f64; N_CORE],
    f_ref: f64,
}

impl<'a> Evaluator<'a> {
    pub fn new(problem: &'a ContinuousProblem) -> Self {
        let (l, h) = problem.bounds();
        let dim = l.len();
        let mut lo = [0.0; 8];
        let mut span = [0.0; 8];
        for i in 0..dim {
            lo[i] = l[i];
            span[i] = (h[i] - l[i]).max(0.0);
        }
        let mut ev = Evaluator {
            problem,
            dim,
            lo,
            span,
            m: N_CORE + problem.side.len(),
            scales: constraint_scales(&problem.params, &problem.assign),
            f_ref: 1.0,
        };
        let mid = vec![0.5; dim];
        let f_mid = ev.outcome(&mid).objective.abs();
        ev.f_ref = if f_mid.is_finite() && f_mid > 1e-9 { f_mid } else { 1.0 };
        ev
    }

    pub fn is_empty_box(&self) -> bool {
        let (l, h) = self.problem.bounds();
        l.iter().zip(&h).any(|(a, b)| a > b)
    }

    pub fn to_point(&self, u: &[f64]) -> (ContinuousPoint, f64) {
        let mut x = [0.0; 8];
        for i in 0..self.dim {
            x[i] = self.lo[i] + u[i] * self.span[i];
        }
        let b = if self.dim > DIMENSIONS {
            x[DIMENSIONS]
        } else {
            self.problem.params.foundation_width
        };
        (ContinuousPoint::from_slice(&x), b)
    }

    pub fn to_unit(&self, p: &ContinuousPoint, b_fo: f64) -> Vec<f64> {
        let mut x = p.to_array().to_vec();
        if self.dim > DIMENSIONS {
            x.push(b_fo);
        }
        x.iter()
            .enumerate()
            .map(|(i, v)| {
                if self.span[i] > 0.0 {
                    ((v - self.lo[i]) / self.span[i]).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn state_at(&self, u: &[f64]) -> (ContinuousPoint, f64, DerivedState, BuildingParams) {
        let (point, b) = self.to_point(u);
        let mut params = self.problem.params;
        params.foundation_width = b;
        let state = derive_state(&params, &self.problem.assign, &point);
        (point, b, state, params)
    }

    /// Scaled objective; fills `g` with residuals relative to their scale.
    pub fn evaluate(&self, u: &[f64], g: &mut [f64]) -> f64 {
        let (_, b, state, params) = self.state_at(u);
        let assign = &self.problem.assign;
        let mut core = [0.0; N_CORE];
        core_residuals(&params, assign, &state, &mut core);
        for i in 0..N_CORE {
            g[i] = core[i] / self.scales[i];
        }
        let c = cost(&params, assign, &state);
        let e = embodied_energy(&params, assign, &state);
        for (k, s) in self.problem.side.iter().enumerate() {
            g[N_CORE + k] = side_residual(s, c, e, &state);
        }
        raw_objective(self.problem.objective, c, e, &state, b) / self.f_ref
    }

    pub fn outcome(&self, u: &[f64]) -> Outcome {
        let mut g = vec![0.0; self.m];
        let f = self.evaluate(u, &mut g);
        let (point, b, state, params) = self.state_at(u);
        let assign = &self.problem.assign;
        Outcome {
            point,
            b_fo: b,
            cost: cost(&params, assign, &state),
            ee: embodied_energy(&params, assign, &state),
            objective: f * self.f_ref,
            max_residual: max_violation_signed(&g),
        }
    }
}

fn raw_objective(obj: Objective, cost: f64, ee: f64, s: &DerivedState, b: f64) -> f64 {
    match obj {
        Objective::MinEmbodiedEnergy => ee,
        Objective::MinCost => cost,
        Objective::MaxFloorArea => -s.point.floor_area(),
        Objective::MinFoundationWidth => b,
        Objective::Feasibility => 0.0,
    }
}

fn side_residual(s: &SideConstraint, cost: f64, ee: f64, state: &DerivedState) -> f64 {
    match *s {
        SideConstraint::CostAtMost(b) => (cost - b) / b.abs().max(1.0),
        SideConstraint::EnergyAtMost(gj) => (ee / 1000.0 - gj) / gj.abs().max(1.0),
        SideConstraint::FloorAreaAtLeast(a) => (a - state.point.floor_area()) / a.abs().max(1.0),
    }
}

/// Largest entry (NaN counts as infinite).
pub(crate) fn max_violation_signed(g: &[f64]) -> f64 {
    g.iter()
        .map(|v| if v.is_nan() { f64::INFINITY } else { *v })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Reporting value of a solver-sense objective.
pub(crate) fn report_value(obj: Objective, raw: f64) -> f64 {
    match obj {
        Objective::MinEmbodiedEnergy => raw / 1000.0,
        Objective::MaxFloorArea => -raw,
        _ => raw,
    }
}
