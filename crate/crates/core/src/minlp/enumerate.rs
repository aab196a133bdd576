//! Discrete enumeration, interval presolve and objective lower bounds.

use crate::materials::MaterialSpec;
use crate::model::{BuildingParams, DiscreteAssignment};

use super::ScenarioConfig;

/// Material tuples × slice counts × rebar counts × branch bits, filtered by
/// the scenario rules, in a fixed order.
pub fn enumerate_discrete(scenario: &ScenarioConfig) -> Vec<DiscreteAssignment> {
    let p = &scenario.params;
    let c = &scenario.catalog;
    let rebar = if scenario.exhaustive_rebar {
        p.min_rebar_count..=p.max_rebar_count()
    } else {
        p.min_rebar_count..=p.min_rebar_count
    };
    let mut out = Vec::new();
    for wall in c.walls() {
        for foundation in c.foundations() {
            for roof in c.roofs() {
                for cover in c.covers() {
                    let mut probe = DiscreteAssignment {
                        wall: wall.clone(),
                        foundation: foundation.clone(),
                        roof: roof.clone(),
                        cover: cover.clone(),
                        n_slc: p.min_slices,
                        n_re: p.min_rebar_count,
                        x_e: false,
                        x_wa: false,
                    };
                    if !scenario.rules.iter().all(|r| r.admits(&probe)) {
                        continue;
                    }
                    for n_slc in p.min_slices..=p.max_slices {
                        for n_re in rebar.clone() {
                            for x_e in [false, true] {
                                for x_wa in [false, true] {
                                    probe.n_slc = n_slc;
                                    probe.n_re = n_re;
                                    probe.x_e = x_e;
                                    probe.x_wa = x_wa;
                                    out.push(probe.clone());
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Interval test of the rows that are linear in the search variables: box
/// bounds, roof span, eccentricity window and rebar spacing. `false` means
/// no point of the box can satisfy them, so the assignment is infeasible
/// under relative tolerance `tol`. The foundation width may range over
/// `[b_lo, b_hi]`.
pub fn presolve(params: &BuildingParams, a: &DiscreteAssignment, b_lo: f64, b_hi: f64, tol: f64) -> bool {
    let p = params;
    let t_wa = a.wall.min_thickness_or_zero();
    let t_fo = a.foundation.min_thickness_or_zero();
    if t_wa > p.max_wall_thickness + tol || t_fo > 0.5 * b_hi + tol || b_lo > b_hi {
        return false;
    }
    // shortest y-wall any floor plan meeting the area can have
    let ly_fl_min = p.min_floor_length.max(p.min_floor_area / p.max_floor_length);
    if ly_fl_min > p.max_floor_length + tol {
        return false;
    }
    let ly_min = ly_fl_min + 2.0 * t_wa;
    let ly_max = p.max_floor_length + 2.0 * p.max_wall_thickness;
    let n = a.n_slc as f64;
    if n * p.beam_width > ly_max + tol {
        return false;
    }
    if ly_min > (n - 1.0) * p.max_beam_spacing + n * p.beam_width + tol {
        return false;
    }
    // e = (B - 2 t_fo - t_wa) / 2 is largest at the smallest thicknesses
    let gap = 2.0 * t_fo + t_wa;
    let reachable = if a.x_e {
        // e >= B/6  <=>  B >= 1.5 (2 t_fo + t_wa)
        b_hi >= 1.5 * gap - 3.0 * tol
    } else {
        b_hi >= gap - 2.0 * tol
    };
    if !reachable {
        return false;
    }
    let n_re = a.n_re as f64;
    n_re * p.rebar_diameter + (n_re - 1.0) * p.min_rebar_spacing <= p.max_wall_thickness + tol
}

/// Lower bounds on cost (USD) and embodied energy (GJ) over the whole box
/// of an assignment, from separately minimized volumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveBounds {
    pub cost: f64,
    pub ee: f64,
}

/// Minimum of `alpha * l_y + beta * l_x` over floor plans in the box with
/// `l_x * l_y >= area` and `l_y >= ly_lo`.
fn min_plan(p: &BuildingParams, alpha: f64, beta: f64, ly_lo: f64) -> f64 {
    let area = p.min_floor_area;
    let lo = p.min_floor_length;
    let hi = p.max_floor_length;
    let ly_lo = ly_lo.max(lo);
    let lx_lo = lo.max(area / hi);
    if alpha <= 0.0 || beta <= 0.0 {
        let ly = if alpha > 0.0 { ly_lo.max(area / hi) } else { hi };
        let lx = if beta > 0.0 { lx_lo } else { hi };
        return alpha * ly + beta * lx;
    }
    let f = |lx: f64| alpha * ly_lo.max(area / lx) + beta * lx;
    // convex piecewise function: endpoints, kink and smooth stationary point
    let kink = area / ly_lo;
    let stat = (alpha * area / beta).sqrt();
    [lx_lo, hi, kink.clamp(lx_lo, hi), stat.clamp(lx_lo, hi)]
        .into_iter()
        .map(f)
        .fold(f64::INFINITY, f64::min)
}

/// Absolute slack (m) granted to rows that hold only within tolerance.
const SLACK: f64 = 1e-5;

/// Volume lower bounds: (roof slices, walls, foundation, rebar length).
fn volume_bounds(p: &BuildingParams, a: &DiscreteAssignment, b_fo: f64) -> [f64; 4] {
    let n_rm = p.n_rooms as f64;
    let n = a.n_slc as f64;
    let t_min = a.wall.min_thickness_or_zero();
    let t_fo_lo = a.foundation.min_thickness_or_zero();
    // a non-negative eccentricity caps both thicknesses
    let t_max = p.max_wall_thickness.min(b_fo - 2.0 * t_fo_lo + SLACK).max(t_min);
    let t_fo_hi = (0.5 * b_fo).min(0.5 * (b_fo - t_min) + SLACK).max(t_fo_lo);
    let ly_lo = n * p.beam_width - 2.0 * t_max;

    let lx_fl_min = p.min_floor_length.max(p.min_floor_area / p.max_floor_length);
    let lx_wa = lx_fl_min + 2.0 * t_min;
    let half = 0.5 * lx_wa;
    let rafter = ((p.rafter_ratio * half).powi(2) + half * half).sqrt();
    let slices = n_rm * n * (p.beam_area * lx_wa + 2.0 * p.rafter_area * rafter);

    // v_wa_tot = t·G with G = h (2 n_rm l_y + (n_rm + 1) l_x_wa) - n_rm (w_do h_do + l_wi²).
    // The door is at most half the longer wall and the window at most half
    // the height; G is concave in h, so its minimum sits at an end of the
    // height range.
    let alpha = 2.0 * n_rm;
    let beta = n_rm + 1.0;
    let gamma = 0.5 * n_rm * p.door_height;
    let g_at = |h: f64| {
        let plan = min_plan(p, h * alpha - gamma, h * beta, ly_lo)
            .min(min_plan(p, h * alpha, h * beta - gamma, ly_lo));
        plan + h * beta * 2.0 * t_min - gamma * 2.0 * t_max - n_rm * h * h / 4.0
    };
    let g_lb = g_at(p.min_wall_height).min(g_at(p.max_wall_height));
    let walls = if g_lb >= 0.0 { t_min * g_lb } else { t_max * g_lb };

    // v_fo_tot = (2 n_rm (l_y_wa - 2 t_fo) + (n_rm + 1) l_x_wa) a_fo
    let h = p.foundation_height;
    let a_fo = |t: f64| b_fo * h - 2.0 * t * (h - t);
    let a_fo_min = [t_fo_lo, t_fo_hi, (0.5 * h).clamp(t_fo_lo, t_fo_hi)]
        .into_iter()
        .map(a_fo)
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let bracket = min_plan(p, alpha, beta, ly_lo)
        + alpha * (2.0 * t_min - 2.0 * t_fo_hi)
        + beta * 2.0 * t_min;
    let foundation = bracket.max(0.0) * a_fo_min;

    let rebar = n_rm
        * (a.n_re as f64 * 2.0 * (p.min_door_width + p.door_height) + 4.0 * p.min_window_length);
    [slices, walls, foundation, rebar]
}

fn per_m3(m: &MaterialSpec) -> (f64, f64) {
    (m.unit_cost, m.embodied_energy_per_m3())
}

/// Lower bounds valid for every point of the assignment's box at the
/// scenario's foundation width.
pub fn objective_bounds(p: &BuildingParams, a: &DiscreteAssignment) -> ObjectiveBounds {
    let [slices, walls, foundation, rebar] = volume_bounds(p, a, p.foundation_width);
    let (cr, er) = per_m3(&a.roof);
    let (cc, ec) = per_m3(&a.cover);
    let (cw, ew) = per_m3(&a.wall);
    let (cf, ef) = per_m3(&a.foundation);
    let cost = slices * (cr + p.cover_ratio * cc) + walls * cw + foundation * cf + rebar * p.rebar_unit_cost;
    let ee = slices * (er + p.cover_ratio * ec)
        + walls * ew
        + foundation * ef
        + rebar * p.rebar_embodied_energy * p.rebar_linear_density;
    // slack for points that meet the floor-area row only within tolerance
    let shave = |x: f64| x - 1e-5 * x.abs();
    ObjectiveBounds {
        cost: shave(cost),
        ee: shave(ee / 1000.0),
    }
}
