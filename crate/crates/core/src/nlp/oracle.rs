//! Exhaustive grid search over the problem box, after interval tightening.

use std::cmp::Ordering;

use rayon::prelude::*;

use super::problem::{report_value, Evaluator};
use super::{ContinuousProblem, Objective, SideConstraint, SolveReport, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    /// points per dimension
    pub resolution: usize,
    /// zoom passes around the incumbent, each one grid cell wide
    pub refinements: usize,
    pub tolerance: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            resolution: 15,
            refinements: 1,
            tolerance: 1e-6,
        }
    }
}

/// Absolute slack (m) on tightened limits.
const TIGHTEN_SLACK: f64 = 1e-5;

/// Shrinks the box with interval reasoning on the rows that are linear or
/// bilinear in the dimensions: roof span, floor area, eccentricity window,
/// foundation half-width, orientation, opening sizes and rebar spacing.
/// Every feasible point stays inside. Returns `None` when the box empties.
pub fn tightened_bounds(problem: &ContinuousProblem) -> Option<(Vec<f64>, Vec<f64>)> {
    let (mut lo, mut hi) = problem.bounds();
    let p = &problem.params;
    let a = &problem.assign;
    let n = a.n_slc as f64;
    let n_re = a.n_re as f64;
    let area = floor_area_floor(problem);
    let span_lo = n * p.beam_width;
    let span_hi = (n - 1.0) * p.max_beam_spacing + n * p.beam_width;
    let variable_b = problem.objective == Objective::MinFoundationWidth;
    let (b_lo, b_hi) = if variable_b {
        (lo[7], hi[7])
    } else {
        (p.foundation_width, p.foundation_width)
    };
    // 2 t_fo + t_wa = b - 2e, with e inside the branch window
    let (gap_lo, gap_hi) = if a.x_e {
        (b_lo / 3.0, 2.0 * b_hi / 3.0)
    } else {
        (2.0 * b_lo / 3.0, b_hi)
    };
    let (t, h, lx, ly, f, w, l) = (0, 1, 2, 3, 4, 5, 6);
    let s = TIGHTEN_SLACK;
    macro_rules! up {
        ($i:expr, $v:expr) => {{
            let v = $v;
            hi[$i] = hi[$i].min(v + s);
        }};
    }
    macro_rules! down {
        ($i:expr, $v:expr) => {{
            let v = $v;
            lo[$i] = lo[$i].max(v - s);
        }};
    }
    for _ in 0..8 {
        up!(ly, span_hi - 2.0 * lo[t]);
        up!(t, 0.5 * (span_hi - lo[ly]));
        down!(ly, span_lo - 2.0 * hi[t]);
        down!(t, 0.5 * (span_lo - hi[ly]));
        if hi[ly] > 0.0 {
            down!(lx, area / hi[ly]);
        }
        if hi[lx] > 0.0 {
            down!(ly, area / hi[lx]);
        }
        up!(t, gap_hi - 2.0 * lo[f]);
        up!(f, 0.5 * (gap_hi - lo[t]));
        down!(t, gap_lo - 2.0 * hi[f]);
        down!(f, 0.5 * (gap_lo - hi[t]));
        up!(f, 0.5 * b_hi);
        // the long side carries the opening and is at least sqrt(area)
        let (short, long) = if a.x_wa { (lx, ly) } else { (ly, lx) };
        up!(short, hi[long]);
        down!(long, lo[short]);
        down!(long, area.sqrt());
        let long_hi = if a.x_wa { hi[ly] } else { hi[lx] } + 2.0 * hi[t];
        up!(w, 0.5 * long_hi);
        up!(l, 0.5 * long_hi);
        up!(l, 0.5 * hi[h]);
        down!(h, 2.0 * lo[l]);
        down!(t, n_re * p.rebar_diameter + (n_re - 1.0) * p.min_rebar_spacing);
    }
    let (l0, h0) = problem.bounds();
    for i in 0..lo.len() {
        lo[i] = lo[i].max(l0[i]);
        hi[i] = hi[i].min(h0[i]);
        if lo[i] > hi[i] {
            return None;
        }
    }
    Some((lo, hi))
}

/// Best feasible point of a uniform grid, with one refinement pass.
pub fn grid_oracle(problem: &ContinuousProblem, resolution: usize) -> SolveReport {
    grid_oracle_with(
        problem,
        &GridOptions {
            resolution,
            ..GridOptions::default()
        },
    )
}

#[derive(Clone, Copy)]
struct Best {
    feasible: bool,
    /// objective when feasible, violation otherwise
    score: f64,
    w_do: f64,
    l_wi: f64,
    index: usize,
}

impl Best {
    /// Total order: feasible first, lower score, wider door, longer window,
    /// then grid index.
    fn cmp(&self, o: &Best) -> Ordering {
        o.feasible
            .cmp(&self.feasible)
            .then(self.score.total_cmp(&o.score))
            .then(o.w_do.total_cmp(&self.w_do))
            .then(o.l_wi.total_cmp(&self.l_wi))
            .then(self.index.cmp(&o.index))
    }
}

fn pick(a: Option<Best>, b: Option<Best>) -> Option<Best> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if x.cmp(&y) == Ordering::Greater { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Grid coordinates in `[0, 1]` per dimension, mapped in dependency order
/// onto the interval the linear rows leave for that dimension given the
/// ones already placed. The unit coordinate 1 lands exactly on an active
/// row such as a zero eccentricity or a door of half the wall.
struct DependentGrid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    span_lo: f64,
    span_hi: f64,
    area: f64,
    fixed_b: Option<f64>,
    x_e: bool,
    x_wa: bool,
}

impl DependentGrid {
    fn new(problem: &ContinuousProblem, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        let p = &problem.params;
        let n = problem.assign.n_slc as f64;
        DependentGrid {
            lo,
            hi,
            span_lo: n * p.beam_width,
            span_hi: (n - 1.0) * p.max_beam_spacing + n * p.beam_width,
            area: floor_area_floor(problem),
            fixed_b: (problem.objective != Objective::MinFoundationWidth).then_some(p.foundation_width),
            x_e: problem.assign.x_e,
            x_wa: problem.assign.x_wa,
        }
    }

    fn physical(&self, v: &[f64]) -> Vec<f64> {
        let (t, h, lx, ly, f, w, l) = (0, 1, 2, 3, 4, 5, 6);
        let mut x = vec![0.0; v.len()];
        let place = |i: usize, a: f64, b: f64| {
            let a = a.max(self.lo[i]);
            let b = b.min(self.hi[i]);
            if b > a {
                a + v[i] * (b - a)
            } else {
                a.min(self.hi[i])
            }
        };
        x[t] = place(t, f64::NEG_INFINITY, f64::INFINITY);
        x[h] = place(h, f64::NEG_INFINITY, f64::INFINITY);
        let b = match self.fixed_b {
            Some(b) => b,
            None => {
                x[7] = place(7, f64::NEG_INFINITY, f64::INFINITY);
                x[7]
            }
        };
        x[ly] = place(ly, self.span_lo - 2.0 * x[t], self.span_hi - 2.0 * x[t]);
        let (lx_lo, lx_hi) = if self.x_wa {
            (f64::NEG_INFINITY, x[ly])
        } else {
            (x[ly], f64::INFINITY)
        };
        x[lx] = place(lx, lx_lo.max(self.area / x[ly]), lx_hi);
        let (gap_lo, gap_hi) = if self.x_e {
            (b / 3.0, 2.0 * b / 3.0)
        } else {
            (2.0 * b / 3.0, b)
        };
        x[f] = place(f, 0.5 * (gap_lo - x[t]), (0.5 * (gap_hi - x[t])).min(0.5 * b));
        let long = if self.x_wa { x[ly] } else { x[lx] } + 2.0 * x[t];
        x[w] = place(w, f64::NEG_INFINITY, 0.5 * long);
        x[l] = place(l, f64::NEG_INFINITY, (0.5 * long).min(0.5 * x[h]));
        x
    }
}

fn floor_area_floor(problem: &ContinuousProblem) -> f64 {
    problem
        .side
        .iter()
        .filter_map(|s| match s {
            SideConstraint::FloorAreaAtLeast(x) => Some(*x),
            _ => None,
        })
        .fold(problem.params.min_floor_area, f64::max)
}

pub fn grid_oracle_with(problem: &ContinuousProblem, opts: &GridOptions) -> SolveReport {
    let ev = Evaluator::new(problem);
    let dim = ev.dim;
    let r = opts.resolution.max(1);
    let tight = tightened_bounds(problem);
    let layout = tight
        .clone()
        .map(|(lo, hi)| DependentGrid::new(problem, lo, hi));
    let to_unit = |x: &[f64]| -> Vec<f64> {
        (0..dim)
            .map(|i| {
                if ev.span[i] > 0.0 {
                    ((x[i] - ev.lo[i]) / ev.span[i]).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    };
    let unit_of = |v: &[f64]| match &layout {
        Some(g) => to_unit(&g.physical(v)),
        None => v.to_vec(),
    };
    let mut lo = vec![0.0; dim];
    let mut hi = vec![1.0; dim];
    let mut incumbent: Option<(Best, Vec<f64>)> = None;
    let total = r.pow(dim as u32);

    let node = |lo: &[f64], hi: &[f64], index: usize| -> Vec<f64> {
        let mut k = index;
        (0..dim)
            .map(|i| {
                let j = k % r;
                k /= r;
                if r == 1 {
                    0.5 * (lo[i] + hi[i])
                } else {
                    lo[i] + (hi[i] - lo[i]) * j as f64 / (r - 1) as f64
                }
            })
            .collect()
    };

    if !ev.is_empty_box() && layout.is_some() {
        for _pass in 0..=opts.refinements {
            let best = (0..total)
                .into_par_iter()
                .fold(
                    || (None, vec![0.0; ev.m]),
                    |(acc, mut g), idx| {
                        let u = unit_of(&node(&lo, &hi, idx));
                        let f = ev.evaluate(&u, &mut g);
                        let v = g
                            .iter()
                            .map(|x| if x.is_nan() { f64::INFINITY } else { *x })
                            .fold(f64::NEG_INFINITY, f64::max);
                        let feasible = v <= opts.tolerance && f.is_finite();
                        let (p, _) = ev.to_point(&u);
                        let cand = Best {
                            feasible,
                            score: if feasible { f } else { v },
                            w_do: p.w_do,
                            l_wi: p.l_wi,
                            index: idx,
                        };
                        (pick(acc, Some(cand)), g)
                    },
                )
                .map(|(b, _)| b)
                .reduce(|| None, pick);
            let Some(best) = best else { break };
            let v = node(&lo, &hi, best.index);
            let replace = match &incumbent {
                None => true,
                Some((b, _)) => best.cmp(b) == Ordering::Less,
            };
            if replace {
                incumbent = Some((best, v));
            }
            let (_, centre) = incumbent.as_ref().expect("set above");
            if r < 2 {
                break;
            }
            let (old_lo, old_hi) = (lo.clone(), hi.clone());
            for i in 0..dim {
                let cell = (old_hi[i] - old_lo[i]) / (r - 1) as f64;
                lo[i] = (centre[i] - cell).max(0.0);
                hi[i] = (centre[i] + cell).min(1.0);
            }
        }
    }

    let u = incumbent
        .as_ref()
        .map(|(_, v)| unit_of(v))
        .unwrap_or_else(|| vec![0.5; dim]);
    let out = ev.outcome(&u);
    let status = match &incumbent {
        Some((b, _)) if b.feasible => SolveStatus::Feasible,
        _ => SolveStatus::Infeasible,
    };
    SolveReport {
        status,
        point: out.point,
        b_fo: out.b_fo,
        objective_value: report_value(problem.objective, out.objective),
        cost: out.cost,
        ee: out.ee / 1000.0,
        max_residual: out.max_residual,
        starts_used: 0,
        seed: 0,
        traces: Vec::new(),
    }
}
