//! Inequality constraints as signed residuals (`lhs - rhs`, satisfied when
//! `<= 0`).

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BoundBox, BuildingParams, DerivedState, DiscreteAssignment, DIMENSION_NAMES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintGroup {
    Roof,
    FloorArea,
    WallStressX,
    WallStressY,
    Foundation,
    Openings,
    VariableBounds,
}

impl ConstraintGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintGroup::Roof => "roof",
            ConstraintGroup::FloorArea => "floor_area",
            ConstraintGroup::WallStressX => "wall_stress_x",
            ConstraintGroup::WallStressY => "wall_stress_y",
            ConstraintGroup::Foundation => "foundation",
            ConstraintGroup::Openings => "openings",
            ConstraintGroup::VariableBounds => "variable_bounds",
        }
    }
}

impl fmt::Display for ConstraintGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintId {
    RoofMinSpan,
    RoofMaxSpan,
    FloorArea,
    WallXCompressionWind,
    WallXCompressionSeismic,
    WallXTensionWind,
    WallXTensionSeismic,
    WallXShearWind,
    WallXShearSeismic,
    WallYCompressionWind,
    WallYCompressionSeismic,
    WallYTensionWind,
    WallYTensionSeismic,
    WallYShearWind,
    WallYShearSeismic,
    EccentricityLower,
    EccentricityUpper,
    FoundationShearX,
    FoundationShearY,
    FoundationThickness,
    WallOrientation,
    DoorWidth,
    WindowWidth,
    WindowHeight,
    RebarSpacing,
    WallVolume,
    /// lower bound of a continuous dimension (index into the point)
    Lower(u8),
    /// upper bound of a continuous dimension
    Upper(u8),
}

impl ConstraintId {
    pub fn group(self) -> ConstraintGroup {
        use ConstraintId::*;
        match self {
            RoofMinSpan | RoofMaxSpan => ConstraintGroup::Roof,
            FloorArea => ConstraintGroup::FloorArea,
            WallXCompressionWind | WallXCompressionSeismic | WallXTensionWind
            | WallXTensionSeismic | WallXShearWind | WallXShearSeismic => {
                ConstraintGroup::WallStressX
            }
            WallYCompressionWind | WallYCompressionSeismic | WallYTensionWind
            | WallYTensionSeismic | WallYShearWind | WallYShearSeismic => {
                ConstraintGroup::WallStressY
            }
            EccentricityLower | EccentricityUpper | FoundationShearX | FoundationShearY
            | FoundationThickness => ConstraintGroup::Foundation,
            WallOrientation | DoorWidth | WindowWidth | WindowHeight | RebarSpacing
            | WallVolume => ConstraintGroup::Openings,
            Lower(_) | Upper(_) => ConstraintGroup::VariableBounds,
        }
    }

    pub fn name(self) -> String {
        use ConstraintId::*;
        let s = match self {
            RoofMinSpan => "roof_min_span",
            RoofMaxSpan => "roof_max_span",
            FloorArea => "floor_area",
            WallXCompressionWind => "wall_x_compression_wind",
            WallXCompressionSeismic => "wall_x_compression_seismic",
            WallXTensionWind => "wall_x_tension_wind",
            WallXTensionSeismic => "wall_x_tension_seismic",
            WallXShearWind => "wall_x_shear_wind",
            WallXShearSeismic => "wall_x_shear_seismic",
            WallYCompressionWind => "wall_y_compression_wind",
            WallYCompressionSeismic => "wall_y_compression_seismic",
            WallYTensionWind => "wall_y_tension_wind",
            WallYTensionSeismic => "wall_y_tension_seismic",
            WallYShearWind => "wall_y_shear_wind",
            WallYShearSeismic => "wall_y_shear_seismic",
            EccentricityLower => "eccentricity_lower",
            EccentricityUpper => "eccentricity_upper",
            FoundationShearX => "foundation_shear_x",
            FoundationShearY => "foundation_shear_y",
            FoundationThickness => "foundation_thickness",
            WallOrientation => "wall_orientation",
            DoorWidth => "door_width",
            WindowWidth => "window_width",
            WindowHeight => "window_height",
            RebarSpacing => "rebar_spacing",
            WallVolume => "wall_volume",
            Lower(i) => return format!("{}_min", DIMENSION_NAMES[i as usize]),
            Upper(i) => return format!("{}_max", DIMENSION_NAMES[i as usize]),
        };
        s.to_string()
    }
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Number of model constraints, excluding variable bounds.
pub const N_CORE: usize = 26;

/// Model constraints in the order [`core_residuals`] writes them.
pub const CORE_CONSTRAINTS: [ConstraintId; N_CORE] = {
    use ConstraintId::*;
    [
        RoofMinSpan,
        RoofMaxSpan,
        FloorArea,
        WallXCompressionWind,
        WallXCompressionSeismic,
        WallXTensionWind,
        WallXTensionSeismic,
        WallXShearWind,
        WallXShearSeismic,
        WallYCompressionWind,
        WallYCompressionSeismic,
        WallYTensionWind,
        WallYTensionSeismic,
        WallYShearWind,
        WallYShearSeismic,
        EccentricityLower,
        EccentricityUpper,
        FoundationShearX,
        FoundationShearY,
        FoundationThickness,
        WallOrientation,
        DoorWidth,
        WindowWidth,
        WindowHeight,
        RebarSpacing,
        WallVolume,
    ]
};

/// Writes the model residuals into `out`, in [`CORE_CONSTRAINTS`] order.
///
/// The foundation shear pair and the eccentricity window follow
/// `assign.x_e`; the opening limit uses the wall selected by `assign.x_wa`.
pub fn core_residuals(
    params: &BuildingParams,
    assign: &DiscreteAssignment,
    s: &DerivedState,
    out: &mut [f64; N_CORE],
) {
    let p = params;
    let pt = &s.point;
    let n_slc = assign.n_slc as f64;
    let n_re = assign.n_re as f64;
    let sigma_c = assign.wall.strength();
    let sigma_t = p.allowable_tension;
    let tau = p.allowable_shear;
    let b = s.b_fo;

    out[0] = n_slc * p.beam_width - s.l_y_wa;
    out[1] = s.l_y_wa - ((n_slc - 1.0) * p.max_beam_spacing + n_slc * p.beam_width);
    out[2] = p.min_floor_area - pt.l_x_fl * pt.l_y_fl;

    let nx = (s.f_d_x_wa + s.f_l_x_wa) / s.a_wa_x;
    let wind_x = s.m_w_x / s.s_x;
    let quake_x = s.m_e_x / s.s_x;
    out[3] = nx + wind_x - sigma_c;
    out[4] = nx + quake_x - sigma_c;
    out[5] = -nx + wind_x - sigma_t;
    out[6] = -nx + quake_x - sigma_t;
    out[7] = 1.5 * s.f_w_x / s.a_wa_x - tau;
    out[8] = 1.5 * s.f_e / s.a_wa_x - tau;

    let ny = s.p_d_wa / pt.t_wa;
    let wind_y = s.m_w_y / s.s_y;
    let quake_y = s.m_e_x / s.s_y;
    out[9] = ny + wind_y - sigma_c;
    out[10] = ny + quake_y - sigma_c;
    out[11] = -ny + wind_y - sigma_t;
    out[12] = -ny + quake_y - sigma_t;
    out[13] = 1.5 * s.f_w_y / s.a_wa_y - tau;
    out[14] = 1.5 * s.f_e / s.a_wa_y - tau;

    let x_load = s.f_d_x_fo + s.f_l_x_wa;
    let y_load = s.p_d_fo + s.p_d_wa;
    if assign.x_e {
        out[15] = b / 6.0 - s.e;
        out[16] = s.e - b / 3.0;
        let k = (1.0 + pt.t_fo / b) / (b - 2.0 * s.e);
        out[17] = k * x_load / s.l_x_wa - tau;
        out[18] = k * y_load - tau;
    } else {
        out[15] = -s.e;
        out[16] = s.e - b / 6.0;
        let k = 1.0 / b + 6.0 * pt.t_fo * s.e / (b * b * b);
        out[17] = 1.5 / s.l_x_wa * x_load * k - tau;
        out[18] = 1.5 * y_load * k - tau;
    }
    out[19] = pt.t_fo - 0.5 * b;

    let long_wall = if assign.x_wa {
        out[20] = s.l_x_wa - s.l_y_wa;
        s.l_y_wa
    } else {
        out[20] = s.l_y_wa - s.l_x_wa;
        s.l_x_wa
    };
    out[21] = pt.w_do - 0.5 * long_wall;
    out[22] = pt.l_wi - 0.5 * long_wall;
    out[23] = pt.l_wi - 0.5 * pt.h_wa;
    out[24] = n_re * p.rebar_diameter + (n_re - 1.0) * p.min_rebar_spacing - pt.t_wa;
    out[25] = -s.v_wa;
}

/// Magnitude each residual is measured against: the allowable stress for
/// stress rows, the minimum area for the floor row and one metre (or one
/// cubic metre) for geometric rows.
pub fn constraint_scales(params: &BuildingParams, assign: &DiscreteAssignment) -> [f64; N_CORE] {
    let sigma_c = assign.wall.strength();
    let sigma_t = params.allowable_tension;
    let tau = params.allowable_shear;
    let mut s = [1.0; N_CORE];
    s[2] = params.min_floor_area.max(1.0);
    for (i, lim) in [sigma_c, sigma_c, sigma_t, sigma_t, tau, tau].into_iter().enumerate() {
        s[3 + i] = lim;
        s[9 + i] = lim;
    }
    s[17] = tau;
    s[18] = tau;
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub id: ConstraintId,
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    /// Residual divided by its scale.
    pub fn relative(&self) -> f64 {
        self.value / self.scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualVector {
    pub entries: Vec<Residual>,
}

impl ResidualVector {
    pub fn get(&self, id: ConstraintId) -> Option<&Residual> {
        self.entries.iter().find(|r| r.id == id)
    }

    pub fn group(&self, g: ConstraintGroup) -> impl Iterator<Item = &Residual> {
        self.entries.iter().filter(move |r| r.id.group() == g)
    }

    /// Largest scaled residual (NaN counts as infinite violation).
    pub fn max_relative(&self) -> f64 {
        self.entries
            .iter()
            .map(|r| {
                let v = r.relative();
                if v.is_nan() {
                    f64::INFINITY
                } else {
                    v
                }
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The constraint with the largest scaled violation.
    pub fn worst(&self) -> Option<&Residual> {
        self.entries
            .iter()
            .max_by(|a, b| a.relative().total_cmp(&b.relative()))
    }
}

/// Every inequality of the model, plus the bound box of the point the state
/// was derived at.
pub fn constraint_residuals(
    params: &BuildingParams,
    assign: &DiscreteAssignment,
    state: &DerivedState,
) -> ResidualVector {
    let mut values = [0.0; N_CORE];
    core_residuals(params, assign, state, &mut values);
    let scales = constraint_scales(params, assign);
    let mut entries: Vec<Residual> = CORE_CONSTRAINTS
        .iter()
        .zip(values.iter().zip(scales.iter()))
        .map(|(&id, (&value, &scale))| Residual { id, value, scale })
        .collect();

    let mut box_params = *params;
    box_params.foundation_width = state.b_fo;
    let bb = BoundBox::new(&box_params, assign);
    for (i, x) in state.point.to_array().into_iter().enumerate() {
        entries.push(Residual {
            id: ConstraintId::Lower(i as u8),
            value: bb.lower[i] - x,
            scale: 1.0,
        });
        entries.push(Residual {
            id: ConstraintId::Upper(i as u8),
            value: x - bb.upper[i],
            scale: 1.0,
        });
    }
    ResidualVector { entries }
}

/// True iff every residual is at most `tol` times its scale (closed).
pub fn is_feasible(residuals: &ResidualVector, tol: f64) -> bool {
    residuals
        .entries
        .iter()
        .all(|r| r.value <= tol * r.scale)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::assignment;
    use super::super::{derive_state, ContinuousPoint};
    use super::*;

    fn design_e() -> (BuildingParams, DiscreteAssignment, ContinuousPoint) {
        // a min-EE point for So2/Br2/Wo/Pl at the 6,414 USD budget
        let p = BuildingParams::default();
        let a = assignment("So2", "Br2", "Wo", "Pl", 7);
        let pt = ContinuousPoint {
            t_wa: 0.3,
            h_wa: 2.7,
            l_x_fl: 3.0,
            l_y_fl: 3.4,
            t_fo: 0.2,
            w_do: 1.1,
            l_wi: 0.7,
        };
        (p, a, pt)
    }

    #[test]
    fn ids_are_grouped_and_named() {
        assert_eq!(CORE_CONSTRAINTS.len(), N_CORE);
        let wx = CORE_CONSTRAINTS
            .iter()
            .filter(|c| c.group() == ConstraintGroup::WallStressX)
            .count();
        let wy = CORE_CONSTRAINTS
            .iter()
            .filter(|c| c.group() == ConstraintGroup::WallStressY)
            .count();
        assert_eq!((wx, wy), (6, 6));
        assert_eq!(ConstraintId::Upper(5).name(), "w_do_max");
        assert_eq!(ConstraintGroup::Roof.to_string(), "roof");
    }

    #[test]
    fn relaxed_shear_limit_makes_shear_rows_negative() {
        let (mut p, a, pt) = design_e();
        p.allowable_shear = 1.0e6 * 1.0e6;
        let r = constraint_residuals(&p, &a, &derive_state(&p, &a, &pt));
        for id in [
            ConstraintId::WallXShearWind,
            ConstraintId::WallXShearSeismic,
            ConstraintId::WallYShearWind,
            ConstraintId::WallYShearSeismic,
            ConstraintId::FoundationShearX,
            ConstraintId::FoundationShearY,
        ] {
            assert!(r.get(id).unwrap().value < 0.0, "{id}");
        }
    }

    #[test]
    fn stresses_compare_in_pascal() {
        let (p, a, pt) = design_e();
        let s = derive_state(&p, &a, &pt);
        let r = constraint_residuals(&p, &a, &s);
        let shear = r.get(ConstraintId::WallXShearWind).unwrap();
        let stress = 1.5 * s.f_w_x / s.a_wa_x;
        assert!((shear.value - (stress - 0.5e6)).abs() < 1e-6);
        assert_eq!(shear.scale, 0.5e6);
        // wall shear from wind on a 3.6 m wall: tens of kPa, far below 0.5 MPa
        assert!(stress > 1.0e4 && stress < 0.5e6, "{stress}");
    }

    #[test]
    fn eccentricity_window_follows_branch() {
        let (p, mut a, pt) = design_e();
        let s = derive_state(&p, &a, &pt);
        // e = 0.5·(0.8 − 0.4 − 0.3) = 0.05 < 0.8/6
        assert!((s.e - 0.05).abs() < 1e-12);
        let r0 = constraint_residuals(&p, &a, &s);
        assert!(r0.get(ConstraintId::EccentricityLower).unwrap().value <= 0.0);
        assert!(r0.get(ConstraintId::EccentricityUpper).unwrap().value <= 0.0);
        a.x_e = true;
        let r1 = constraint_residuals(&p, &a, &s);
        assert!(r1.get(ConstraintId::EccentricityLower).unwrap().value > 0.0);
    }

    #[test]
    fn orientation_selects_long_wall() {
        let (p, mut a, pt) = design_e();
        let s = derive_state(&p, &a, &pt);
        let r = constraint_residuals(&p, &a, &s);
        assert!(r.get(ConstraintId::WallOrientation).unwrap().value <= 0.0);
        a.x_wa = false;
        let r = constraint_residuals(&p, &a, &s);
        assert!(r.get(ConstraintId::WallOrientation).unwrap().value > 0.0);
    }

    #[test]
    fn tolerance_boundary_is_closed() {
        let tol = 1e-6;
        let mk = |v: f64| ResidualVector {
            entries: vec![
                Residual { id: ConstraintId::FloorArea, value: -1.0, scale: 10.0 },
                Residual { id: ConstraintId::WallXShearWind, value: v, scale: 5.0e5 },
            ],
        };
        assert!(is_feasible(&mk(-1.0), tol));
        assert!(is_feasible(&mk(tol * 5.0e5), tol));
        assert!(!is_feasible(&mk(10.0 * tol * 5.0e5), tol));
    }

    #[test]
    fn bounds_are_reported() {
        let (p, a, mut pt) = design_e();
        pt.t_wa = 0.2;
        let r = constraint_residuals(&p, &a, &derive_state(&p, &a, &pt));
        let lo = r.get(ConstraintId::Lower(0)).unwrap();
        assert!((lo.value - 0.1).abs() < 1e-12);
        assert!(!is_feasible(&r, 1e-6));
        assert_eq!(r.group(ConstraintGroup::VariableBounds).count(), 14);
    }
}
