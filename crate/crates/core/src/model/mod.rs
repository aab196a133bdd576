//! The one-story multi-room masonry building: parameters, decision
//! variables, derived quantities, constraints and the two objectives.
//!
//! Every quantity here is a pure function of
//! `(BuildingParams, DiscreteAssignment, ContinuousPoint)`. Definitional
//! equalities are substituted into [`DerivedState`], which leaves seven free
//! continuous dimensions.

mod constraints;
mod params;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::materials::MaterialSpec;

pub use constraints::{
    constraint_residuals, constraint_scales, core_residuals, is_feasible, ConstraintGroup,
    ConstraintId, Residual, ResidualVector, CORE_CONSTRAINTS, N_CORE,
};
pub use params::{BuildingParams, ParamError, PARAM_KEYS};

/// The discrete part of a design: one material per component, the number of
/// roof slices and rebar frames, and the two branch indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteAssignment {
    pub wall: MaterialSpec,
    pub foundation: MaterialSpec,
    pub roof: MaterialSpec,
    pub cover: MaterialSpec,
    pub n_slc: u32,
    pub n_re: u32,
    /// eccentricity at or above one sixth of the foundation width
    pub x_e: bool,
    /// y-direction wall at least as long as the x-direction wall
    pub x_wa: bool,
}

/// Ordering/identity key of an assignment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AssignmentKey {
    pub wall: String,
    pub foundation: String,
    pub roof: String,
    pub cover: String,
    pub n_slc: u32,
    pub n_re: u32,
    pub x_e: bool,
    pub x_wa: bool,
}

impl fmt::Display for AssignmentKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}/slc{}/re{}/e{}/wa{}",
            self.wall,
            self.foundation,
            self.roof,
            self.cover,
            self.n_slc,
            self.n_re,
            u8::from(self.x_e),
            u8::from(self.x_wa)
        )
    }
}

/// Material names for wall, foundation, roof and cover.
pub type MaterialTuple = [String; 4];

impl DiscreteAssignment {
    pub fn key(&self) -> AssignmentKey {
        AssignmentKey {
            wall: self.wall.name.clone(),
            foundation: self.foundation.name.clone(),
            roof: self.roof.name.clone(),
            cover: self.cover.name.clone(),
            n_slc: self.n_slc,
            n_re: self.n_re,
            x_e: self.x_e,
            x_wa: self.x_wa,
        }
    }

    pub fn material_tuple(&self) -> MaterialTuple {
        [
            self.wall.name.clone(),
            self.foundation.name.clone(),
            self.roof.name.clone(),
            self.cover.name.clone(),
        ]
    }
}

/// The seven free continuous dimensions (metres).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousPoint {
    pub t_wa: f64,
    pub h_wa: f64,
    pub l_x_fl: f64,
    pub l_y_fl: f64,
    pub t_fo: f64,
    pub w_do: f64,
    pub l_wi: f64,
}

pub const DIMENSIONS: usize = 7;

pub const DIMENSION_NAMES: [&str; DIMENSIONS] =
    ["t_wa", "h_wa", "l_x_fl", "l_y_fl", "t_fo", "w_do", "l_wi"];

impl ContinuousPoint {
    pub fn to_array(&self) -> [f64; DIMENSIONS] {
        [
            self.t_wa, self.h_wa, self.l_x_fl, self.l_y_fl, self.t_fo, self.w_do, self.l_wi,
        ]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        ContinuousPoint {
            t_wa: x[0],
            h_wa: x[1],
            l_x_fl: x[2],
            l_y_fl: x[3],
            t_fo: x[4],
            w_do: x[5],
            l_wi: x[6],
        }
    }

    /// Floor area of one room.
    pub fn floor_area(&self) -> f64 {
        self.l_x_fl * self.l_y_fl
    }
}

/// Lower and upper limits of each continuous dimension for one assignment.
///
/// Door and window upper limits are not model parameters; they are the
/// largest values any opening constraint can admit (half the longest
/// possible wall, half the tallest wall).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundBox {
    pub lower: [f64; DIMENSIONS],
    pub upper: [f64; DIMENSIONS],
}

impl BoundBox {
    pub fn new(params: &BuildingParams, assign: &DiscreteAssignment) -> Self {
        let longest_wall = params.max_floor_length + 2.0 * params.max_wall_thickness;
        BoundBox {
            lower: [
                assign.wall.min_thickness_or_zero(),
                params.min_wall_height,
                params.min_floor_length,
                params.min_floor_length,
                assign.foundation.min_thickness_or_zero(),
                params.min_door_width,
                params.min_window_length,
            ],
            upper: [
                params.max_wall_thickness,
                params.max_wall_height,
                params.max_floor_length,
                params.max_floor_length,
                0.5 * params.foundation_width,
                0.5 * longest_wall,
                (0.5 * params.max_wall_height).min(0.5 * longest_wall),
            ],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lower.iter().zip(&self.upper).any(|(lo, hi)| lo > hi)
    }

    pub fn contains(&self, p: &ContinuousPoint) -> bool {
        p.to_array()
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    pub fn midpoint(&self) -> ContinuousPoint {
        let mut m = [0.0; DIMENSIONS];
        for (i, v) in m.iter_mut().enumerate() {
            *v = 0.5 * (self.lower[i] + self.upper[i]);
        }
        ContinuousPoint::from_slice(&m)
    }
}

/// Every derived quantity of the building, in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedState {
    pub l_x_wa: f64,
    pub l_y_wa: f64,
    pub a_wa_x: f64,
    pub a_wa_y: f64,
    pub s_x: f64,
    pub s_y: f64,
    /// wall volume of one room (m³)
    pub v_wa: f64,
    pub v_wa_tot: f64,
    pub l_re: f64,
    pub l_re_tot: f64,
    pub v_slc: f64,
    pub v_slc_tot: f64,
    pub v_co_tot: f64,
    /// kg
    pub q_ro: f64,
    /// N/m
    pub p_d_wa: f64,
    pub f_d_x_wa: f64,
    pub f_l_x_wa: f64,
    pub f_w_x: f64,
    pub f_w_y: f64,
    pub m_w_x: f64,
    pub m_w_y: f64,
    pub f_1: f64,
    pub f_e: f64,
    pub m_e_x: f64,
    pub a_fo: f64,
    pub p_d_fo: f64,
    pub f_d_x_fo: f64,
    pub v_fo_tot: f64,
    /// eccentricity (m)
    pub e: f64,
    /// foundation width the state was evaluated with (m)
    pub b_fo: f64,
    /// openings exceed the wall face (`v_wa < 0`)
    pub negative_wall_volume: bool,
    /// the point this state was evaluated at
    pub point: ContinuousPoint,
}

/// Evaluates every derived quantity for one design.
pub fn derive_state(
    params: &BuildingParams,
    assign: &DiscreteAssignment,
    point: &ContinuousPoint,
) -> DerivedState {
    let p = params;
    let g = p.gravity;
    let n_rm = p.n_rooms as f64;
    let n_slc = assign.n_slc as f64;
    let rho_w = assign.wall.density;
    let b_fo = p.foundation_width;
    let ContinuousPoint {
        t_wa,
        h_wa,
        l_x_fl,
        l_y_fl,
        t_fo,
        w_do,
        l_wi,
    } = *point;

    let l_x_wa = l_x_fl + 2.0 * t_wa;
    let l_y_wa = l_y_fl + 2.0 * t_wa;
    let a_wa_x = t_wa * l_x_wa;
    let a_wa_y = t_wa * l_y_wa;
    let s_x = t_wa * l_x_wa * l_x_wa / 6.0;
    let s_y = t_wa * l_y_wa * l_y_wa / 6.0;

    let v_wa = t_wa * (2.0 * h_wa * (l_y_fl + l_x_wa) - (w_do * p.door_height + l_wi * l_wi));
    let v_wa_tot = n_rm * v_wa - (n_rm - 1.0) * t_wa * h_wa * l_x_wa;

    let l_re = assign.n_re as f64 * 2.0 * (w_do + p.door_height) + 4.0 * l_wi;
    let l_re_tot = n_rm * l_re;

    let half = 0.5 * l_x_wa;
    let rafter = ((p.rafter_ratio * half).powi(2) + half * half).sqrt();
    let v_slc = p.beam_area * l_x_wa + 2.0 * p.rafter_area * rafter;
    let v_slc_tot = n_rm * n_slc * v_slc;
    let v_co_tot = p.cover_ratio * v_slc_tot;
    let q_ro = n_slc * v_slc * (assign.roof.density + p.cover_ratio * assign.cover.density);

    let p_d_wa = g * t_wa * h_wa * rho_w;
    let f_d_x_wa = p_d_wa * l_x_wa + 0.5 * g * q_ro;
    let f_l_x_wa = 0.5 * p.live_load * l_x_wa * t_wa;

    let f_w_x = 0.5 * p.wind_coefficient * l_y_wa * h_wa * p.design_wind_pressure;
    let f_w_y = 0.5 * p.wind_coefficient * l_x_wa * h_wa * p.design_wind_pressure;
    let m_w_x = f_w_x * h_wa;
    let m_w_y = f_w_y * h_wa;

    let f_1 = g * p.seismic_coefficient() * v_wa * rho_w;
    let f_e = 0.5 * f_1;
    let m_e_x = f_e * h_wa;

    let h_fo = p.foundation_height;
    let a_fo = b_fo * h_fo - 2.0 * t_fo * (h_fo - t_fo);
    let p_d_fo = g * a_fo * assign.foundation.density;
    let f_d_x_fo = p_d_fo * l_x_wa + f_d_x_wa;
    let v_fo_tot = (2.0 * n_rm * (l_y_wa - 2.0 * t_fo) + (n_rm + 1.0) * l_x_wa) * a_fo;
    let e = 0.5 * (b_fo - 2.0 * t_fo - t_wa);

    DerivedState {
        l_x_wa,
        l_y_wa,
        a_wa_x,
        a_wa_y,
        s_x,
        s_y,
        v_wa,
        v_wa_tot,
        l_re,
        l_re_tot,
        v_slc,
        v_slc_tot,
        v_co_tot,
        q_ro,
        p_d_wa,
        f_d_x_wa,
        f_l_x_wa,
        f_w_x,
        f_w_y,
        m_w_x,
        m_w_y,
        f_1,
        f_e,
        m_e_x,
        a_fo,
        p_d_fo,
        f_d_x_fo,
        v_fo_tot,
        e,
        b_fo,
        negative_wall_volume: v_wa < 0.0,
        point: *point,
    }
}

/// Total material cost (USD).
pub fn cost(params: &BuildingParams, assign: &DiscreteAssignment, state: &DerivedState) -> f64 {
    state.v_slc_tot * assign.roof.unit_cost
        + state.v_co_tot * assign.cover.unit_cost
        + state.v_wa_tot * assign.wall.unit_cost
        + state.v_fo_tot * assign.foundation.unit_cost
        + state.l_re_tot * params.rebar_unit_cost
}

/// Total embodied energy (MJ).
pub fn embodied_energy(
    params: &BuildingParams,
    assign: &DiscreteAssignment,
    state: &DerivedState,
) -> f64 {
    state.v_slc_tot * assign.roof.embodied_energy_per_m3()
        + state.v_co_tot * assign.cover.embodied_energy_per_m3()
        + state.v_wa_tot * assign.wall.embodied_energy_per_m3()
        + state.v_fo_tot * assign.foundation.embodied_energy_per_m3()
        + state.l_re_tot * params.rebar_embodied_energy * params.rebar_linear_density
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::materials::{ComponentClass, MaterialCatalog};

    pub fn assignment(wall: &str, foundation: &str, roof: &str, cover: &str, n_slc: u32) -> DiscreteAssignment {
        let c = MaterialCatalog::case_study();
        DiscreteAssignment {
            wall: c.get(ComponentClass::Wall, wall).unwrap().clone(),
            foundation: c.get(ComponentClass::Foundation, foundation).unwrap().clone(),
            roof: c.get(ComponentClass::Roof, roof).unwrap().clone(),
            cover: c.get(ComponentClass::RoofCover, cover).unwrap().clone(),
            n_slc,
            n_re: 2,
            x_e: false,
            x_wa: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::assignment;
    use super::*;
    use proptest::prelude::*;

    fn br2_point() -> ContinuousPoint {
        ContinuousPoint {
            t_wa: 0.23,
            h_wa: 2.7,
            l_x_fl: 3.2,
            l_y_fl: 3.2,
            t_fo: 0.25,
            w_do: 1.1,
            l_wi: 0.7,
        }
    }

    #[test]
    fn hand_computed_wall_quantities() {
        let p = BuildingParams::default();
        let a = assignment("Br2", "Br2", "Wo", "Pl", 7);
        let s = derive_state(&p, &a, &br2_point());
        assert!((s.l_x_wa - 3.66).abs() < 1e-12);
        assert!((s.a_wa_x - 0.8418).abs() < 1e-12);
        // (1/6)·0.23·3.66²
        assert!((s.s_x - 0.513_498).abs() < 1e-6, "{}", s.s_x);
        // 0.23·(2·2.7·(3.2+3.66) − (1.1·2 + 0.49))
        assert!((s.v_wa - 7.90142).abs() < 1e-9, "{}", s.v_wa);
        // 0.0253·3.66 + 2·0.0065·√((0.4027·1.83)² + 1.83²)
        assert!((s.v_slc - 0.118_25).abs() < 1e-4, "{}", s.v_slc);
        assert!(!s.negative_wall_volume);
    }

    #[test]
    fn zero_thickness_annihilates_wall_terms() {
        let p = BuildingParams::default();
        let a = assignment("Br2", "Br2", "Wo", "Pl", 7);
        let pt = ContinuousPoint { t_wa: 0.0, ..br2_point() };
        let s = derive_state(&p, &a, &pt);
        assert_eq!(s.v_wa, 0.0);
        assert_eq!(s.a_wa_x, 0.0);
        assert_eq!(s.s_x, 0.0);
        assert_eq!(s.v_wa_tot, 0.0);
    }

    #[test]
    fn oversized_openings_are_flagged() {
        let p = BuildingParams::default();
        let a = assignment("Br2", "Br2", "Wo", "Pl", 7);
        let pt = ContinuousPoint {
            l_x_fl: 0.1,
            l_y_fl: 0.1,
            w_do: 3.0,
            l_wi: 1.9,
            ..br2_point()
        };
        let s = derive_state(&p, &a, &pt);
        assert!(s.negative_wall_volume);
        assert!(s.v_wa < 0.0);
    }

    #[test]
    fn objective_examples() {
        let p = BuildingParams::default();
        let a = assignment("So2", "Br2", "Wo", "Pl", 7);
        let zero = DerivedState {
            v_slc_tot: 0.0,
            v_co_tot: 0.0,
            v_wa_tot: 0.0,
            v_fo_tot: 0.0,
            l_re_tot: 0.0,
            ..derive_state(&p, &a, &br2_point())
        };
        assert_eq!(cost(&p, &a, &zero), 0.0);
        assert_eq!(embodied_energy(&p, &a, &zero), 0.0);

        let walls = DerivedState { v_wa_tot: 10.0, ..zero };
        assert!((cost(&p, &a, &walls) - 1450.0).abs() < 1e-9);
        // 10 · 1330 · 0.67
        assert!((embodied_energy(&p, &a, &walls) - 8911.0).abs() < 1e-9);

        let rebar = DerivedState { l_re_tot: 10.0, ..zero };
        assert!((cost(&p, &a, &rebar) - 173.0).abs() < 1e-9);
        // 10 · 0.89 · 37.95
        assert!((embodied_energy(&p, &a, &rebar) - 337.755).abs() < 1e-9);
    }

    #[test]
    fn evaluation_is_bit_identical() {
        let p = BuildingParams::default();
        let a = assignment("Co1", "Br1", "Ba", "Ba", 9);
        let s1 = derive_state(&p, &a, &br2_point());
        let s2 = derive_state(&p, &a, &br2_point());
        assert_eq!(format!("{s1:?}"), format!("{s2:?}"));
    }

    fn in_box() -> impl Strategy<Value = ContinuousPoint> {
        (0.23f64..1.1, 2.7f64..3.8, 2.0f64..4.5, 2.0f64..4.5, 0.23f64..0.4, 1.1f64..3.35, 0.7f64..1.9)
            .prop_map(|(t_wa, h_wa, l_x_fl, l_y_fl, t_fo, w_do, l_wi)| ContinuousPoint {
                t_wa,
                h_wa,
                l_x_fl,
                l_y_fl,
                t_fo,
                w_do,
                l_wi,
            })
    }

    proptest! {
        #[test]
        fn spot_identities(pt in in_box(), n_slc in 2u32..=20) {
            let p = BuildingParams::default();
            let a = assignment("So1", "Br2", "Ba", "Pl", n_slc);
            let s = derive_state(&p, &a, &pt);
            prop_assert!((s.l_x_wa - (pt.l_x_fl + 2.0 * pt.t_wa)).abs() <= 1e-12);
            prop_assert_eq!(s.f_e, 0.5 * s.f_1);
            prop_assert!((s.v_co_tot - p.cover_ratio * s.v_slc_tot).abs() <= 1e-12 * s.v_slc_tot.abs().max(1.0));
            prop_assert!((s.e - 0.5 * (p.foundation_width - 2.0 * pt.t_fo - pt.t_wa)).abs() <= 1e-12);
        }

        #[test]
        fn objectives_monotone_in_volumes(pt in in_box(), dv in 0.0f64..5.0, which in 0usize..5) {
            let p = BuildingParams::default();
            let a = assignment("Br2", "Br2", "Wo", "Pl", 7);
            let s = derive_state(&p, &a, &pt);
            let mut t = s;
            match which {
                0 => t.v_slc_tot += dv,
                1 => t.v_co_tot += dv,
                2 => t.v_wa_tot += dv,
                3 => t.v_fo_tot += dv,
                _ => t.l_re_tot += dv,
            }
            prop_assert!(cost(&p, &a, &t) >= cost(&p, &a, &s));
            prop_assert!(embodied_energy(&p, &a, &t) >= embodied_energy(&p, &a, &s));
        }
    }
}
