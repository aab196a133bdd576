//! ε-constraint sweeps over budget and over floor area.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::minlp::{Design, Engine, MinlpError, Query};
use crate::model::MaterialTuple;

use super::{AxisMode, ParetoFront};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepOptions {
    /// bisection rounds between neighbours whose material tuples differ
    pub refine_depth: u32,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { refine_depth: 4 }
    }
}

/// Uniform grid of `steps` values on `[lo, hi]`; one value when the range
/// collapses.
fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if hi <= lo || steps < 2 {
        return vec![lo];
    }
    let h = (hi - lo) / (steps - 1) as f64;
    (0..steps)
        .map(|k| if k + 1 == steps { hi } else { lo + h * k as f64 })
        .collect()
}

/// Counts of planned and finished ε solves, readable while a sweep runs.
/// Refinement rounds raise `planned` as they are scheduled.
#[derive(Debug, Default)]
pub struct Progress {
    planned: AtomicUsize,
    solved: AtomicUsize,
}

impl Progress {
    pub fn new() -> Self {
        Progress::default()
    }

    pub fn planned(&self) -> usize {
        self.planned.load(Ordering::Relaxed)
    }

    pub fn solved(&self) -> usize {
        self.solved.load(Ordering::Relaxed)
    }

    fn run<F: Fn(f64) -> Option<Design> + Sync>(&self, values: Vec<f64>, solve: &F) -> Vec<Sample> {
        self.planned.fetch_add(values.len(), Ordering::Relaxed);
        values
            .into_par_iter()
            .map(|v| {
                let d = solve(v);
                self.solved.fetch_add(1, Ordering::Relaxed);
                (v, d)
            })
            .collect()
    }
}

type Sample = (f64, Option<Design>);

fn tuple(s: &Sample) -> Option<MaterialTuple> {
    s.1.as_ref().map(Design::material_tuple)
}

/// Solves at every grid value, then repeatedly bisects neighbouring
/// samples that are both feasible but use different material tuples.
/// Each round's midpoints are solved in parallel.
fn sample<F>(values: Vec<f64>, depth: u32, progress: &Progress, solve: F) -> Vec<Sample>
where
    F: Fn(f64) -> Option<Design> + Sync,
{
    let mut samples = progress.run(values, &solve);
    for _ in 0..depth {
        let mids: Vec<f64> = samples
            .windows(2)
            .filter(|w| w[0].1.is_some() && w[1].1.is_some() && tuple(&w[0]) != tuple(&w[1]))
            .map(|w| 0.5 * (w[0].0 + w[1].0))
            .collect();
        if mids.is_empty() {
            break;
        }
        let fresh = progress.run(mids, &solve);
        samples.extend(fresh);
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    samples
}

/// Cost versus embodied-energy front: minimum embodied energy at each
/// budget of a uniform grid on `[budget_lo, budget_hi]`, refined where the
/// optimal material tuple changes, filtered to nondominated points.
/// Every budget is an independent query against the shared engine.
pub fn epsilon_constraint_front(
    engine: &Engine,
    budget_lo: f64,
    budget_hi: f64,
    steps: usize,
    options: SweepOptions,
) -> ParetoFront {
    epsilon_constraint_front_tracked(engine, budget_lo, budget_hi, steps, options, &Progress::new())
}

/// [`epsilon_constraint_front`] reporting into `progress`.
pub fn epsilon_constraint_front_tracked(
    engine: &Engine,
    budget_lo: f64,
    budget_hi: f64,
    steps: usize,
    options: SweepOptions,
    progress: &Progress,
) -> ParetoFront {
    let samples = sample(grid(budget_lo, budget_hi, steps), options.refine_depth, progress, |b| {
        engine.solve_minlp(Some(b)).ok()
    });
    let designs = samples.into_iter().filter_map(|s| s.1).collect();
    ParetoFront::from_designs(AxisMode::CostVsEe, engine.fingerprint(), designs)
}

/// Floor area versus embodied-energy front at a fixed budget: minimum
/// embodied energy subject to cost ≤ `budget` and floor area ≥ ε for ε on a
/// uniform grid of `[area_lo, area_hi]`, refined at wall switches. Fails
/// when even `area_lo` cannot be met.
pub fn floor_area_front(
    engine: &Engine,
    budget: f64,
    area_lo: f64,
    area_hi: f64,
    steps: usize,
    options: SweepOptions,
) -> Result<ParetoFront, MinlpError> {
    floor_area_front_tracked(engine, budget, area_lo, area_hi, steps, options, &Progress::new())
}

/// [`floor_area_front`] reporting into `progress`.
pub fn floor_area_front_tracked(
    engine: &Engine,
    budget: f64,
    area_lo: f64,
    area_hi: f64,
    steps: usize,
    options: SweepOptions,
    progress: &Progress,
) -> Result<ParetoFront, MinlpError> {
    let first = engine.solve(&Query::min_energy(Some(budget)).with_floor_area(area_lo))?;
    let samples = sample(grid(area_lo, area_hi, steps), options.refine_depth, progress, |a| {
        if a == area_lo {
            return Some(first.clone());
        }
        engine
            .solve(&Query::min_energy(Some(budget)).with_floor_area(a))
            .ok()
    });
    let designs = samples.into_iter().filter_map(|s| s.1).collect();
    Ok(ParetoFront::from_designs(AxisMode::AreaVsEe, engine.fingerprint(), designs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing() {
        assert_eq!(grid(1.0, 2.0, 3), vec![1.0, 1.5, 2.0]);
        assert_eq!(grid(5.0, 5.0, 2), vec![5.0]);
        let g = grid(4500.0, 9000.0, 150);
        assert_eq!(g.len(), 150);
        assert_eq!(g[0], 4500.0);
        assert_eq!(g[149], 9000.0);
    }
}
