use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const MPA: f64 = 1.0e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("unknown parameter `{0}`")]
    UnknownKey(String),
    #[error("line {line}: expected `key=value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("parameter `{key}`: `{value}` is not a number")]
    NotANumber { key: String, value: String },
    #[error("parameter `{key}` must be an integer, got {value}")]
    NotAnInteger { key: String, value: f64 },
    #[error("invalid parameters: {0}")]
    Invalid(String),
}

/// Fixed parameters of the building model, stored in SI units (m, kg, N, Pa,
/// MJ, USD). Stress limits are given in MPa in override documents and are
/// converted on the way in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildingParams {
    pub n_rooms: u32,
    /// m² per room
    pub min_floor_area: f64,
    pub min_floor_length: f64,
    pub max_floor_length: f64,
    pub min_wall_height: f64,
    pub max_wall_height: f64,
    pub max_wall_thickness: f64,
    pub door_height: f64,
    pub min_door_width: f64,
    pub min_window_length: f64,
    pub min_rebar_count: u32,
    pub rebar_diameter: f64,
    pub min_rebar_spacing: f64,
    /// USD/m
    pub rebar_unit_cost: f64,
    /// MJ/kg
    pub rebar_embodied_energy: f64,
    /// kg/m
    pub rebar_linear_density: f64,
    /// N/m²
    pub live_load: f64,
    /// N/m²
    pub design_wind_pressure: f64,
    pub wind_coefficient: f64,
    pub seismic_c: f64,
    pub seismic_z: f64,
    pub seismic_i: f64,
    pub seismic_k: f64,
    /// Pa
    pub allowable_shear: f64,
    /// Pa
    pub allowable_tension: f64,
    /// N/kg
    pub gravity: f64,
    pub beam_area: f64,
    pub rafter_area: f64,
    pub beam_width: f64,
    pub max_beam_spacing: f64,
    /// rafter length / beam length
    pub rafter_ratio: f64,
    /// roof-cover volume / roof volume
    pub cover_ratio: f64,
    pub min_slices: u32,
    pub max_slices: u32,
    pub foundation_height: f64,
    pub foundation_width: f64,
    /// USD, optional default budget
    pub budget: Option<f64>,
}

impl Default for BuildingParams {
    fn default() -> Self {
        BuildingParams {
            n_rooms: 3,
            min_floor_area: 10.0,
            min_floor_length: 2.0,
            max_floor_length: 4.5,
            min_wall_height: 2.7,
            max_wall_height: 3.8,
            max_wall_thickness: 1.1,
            door_height: 2.0,
            min_door_width: 1.1,
            min_window_length: 0.7,
            min_rebar_count: 2,
            rebar_diameter: 0.012,
            min_rebar_spacing: 0.05,
            rebar_unit_cost: 17.3,
            rebar_embodied_energy: 37.95,
            rebar_linear_density: 0.89,
            live_load: 2000.0,
            design_wind_pressure: 8120.0,
            wind_coefficient: 1.0,
            seismic_c: 0.08,
            seismic_z: 1.1,
            seismic_i: 1.0,
            seismic_k: 4.0,
            allowable_shear: 0.5 * MPA,
            allowable_tension: 0.12 * MPA,
            gravity: 9.8,
            beam_area: 0.0253,
            rafter_area: 0.0065,
            beam_width: 0.11,
            max_beam_spacing: 0.5,
            rafter_ratio: 0.4027,
            cover_ratio: 0.0628,
            min_slices: 2,
            max_slices: 20,
            foundation_height: 1.1,
            foundation_width: 0.8,
            budget: None,
        }
    }
}

/// Override keys, in document order. Stress keys take MPa.
pub const PARAM_KEYS: [&str; 37] = [
    "n_rm", "A_fl_min", "l_fl_min", "l_fl_max", "h_wa_min", "h_wa_max", "t_wa_max", "h_do",
    "w_do_min", "l_wi_min", "n_re_min", "d_re", "s_re_min", "C_re", "E_re", "rho_re", "P_L",
    "P_design", "C_f", "C", "Z", "I", "K", "tau_allw", "sigma_t_allw", "g", "A_be", "A_ra",
    "w_be", "s_be_max", "R_be", "R_co", "n_slc_min", "n_slc_max", "h_fo", "B_fo", "B_avail",
];

impl BuildingParams {
    /// Seismic load coefficient C·Z·I·K.
    pub fn seismic_coefficient(&self) -> f64 {
        self.seismic_c * self.seismic_z * self.seismic_i * self.seismic_k
    }

    /// Big-M constant for the wall-orientation indicator.
    pub fn wall_big_m(&self) -> f64 {
        self.max_floor_length - self.min_floor_length
    }

    /// Largest rebar count whose frame still fits in the thickest wall.
    pub fn max_rebar_count(&self) -> u32 {
        let n = (self.max_wall_thickness + self.min_rebar_spacing)
            / (self.rebar_diameter + self.min_rebar_spacing);
        (n.floor() as u32).max(self.min_rebar_count)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let positive = [
            ("A_fl_min", self.min_floor_area),
            ("l_fl_min", self.min_floor_length),
            ("h_wa_min", self.min_wall_height),
            ("t_wa_max", self.max_wall_thickness),
            ("h_do", self.door_height),
            ("w_do_min", self.min_door_width),
            ("l_wi_min", self.min_window_length),
            ("d_re", self.rebar_diameter),
            ("rho_re", self.rebar_linear_density),
            ("tau_allw", self.allowable_shear),
            ("sigma_t_allw", self.allowable_tension),
            ("g", self.gravity),
            ("A_be", self.beam_area),
            ("A_ra", self.rafter_area),
            ("w_be", self.beam_width),
            ("s_be_max", self.max_beam_spacing),
            ("h_fo", self.foundation_height),
            ("B_fo", self.foundation_width),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ParamError::Invalid(format!("{key} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("s_re_min", self.min_rebar_spacing),
            ("C_re", self.rebar_unit_cost),
            ("E_re", self.rebar_embodied_energy),
            ("P_L", self.live_load),
            ("P_design", self.design_wind_pressure),
            ("C_f", self.wind_coefficient),
            ("C", self.seismic_c),
            ("Z", self.seismic_z),
            ("I", self.seismic_i),
            ("K", self.seismic_k),
            ("R_be", self.rafter_ratio),
            ("R_co", self.cover_ratio),
        ];
        for (key, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ParamError::Invalid(format!("{key} must be non-negative, got {v}")));
            }
        }
        let ordered = [
            ("l_fl", self.min_floor_length, self.max_floor_length),
            ("h_wa", self.min_wall_height, self.max_wall_height),
            ("n_slc", self.min_slices as f64, self.max_slices as f64),
        ];
        for (key, lo, hi) in ordered {
            if lo > hi {
                return Err(ParamError::Invalid(format!("{key}: lower bound {lo} exceeds upper bound {hi}")));
            }
        }
        if self.n_rooms == 0 {
            return Err(ParamError::Invalid("n_rm must be at least 1".into()));
        }
        if self.min_slices == 0 {
            return Err(ParamError::Invalid("n_slc_min must be at least 1".into()));
        }
        if self.min_rebar_count == 0 {
            return Err(ParamError::Invalid("n_re_min must be at least 1".into()));
        }
        if let Some(b) = self.budget {
            if !(b.is_finite() && b >= 0.0) {
                return Err(ParamError::Invalid(format!("B_avail must be non-negative, got {b}")));
            }
        }
        Ok(())
    }

    /// Sets one parameter by its override key. Stress values are in MPa.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), ParamError> {
        let int = |v: f64| -> Result<u32, ParamError> {
            if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
                Err(ParamError::NotAnInteger {
                    key: key.to_string(),
                    value: v,
                })
            } else {
                Ok(v as u32)
            }
        };
        match key {
            "n_rm" => self.n_rooms = int(value)?,
            "A_fl_min" => self.min_floor_area = value,
            "l_fl_min" => self.min_floor_length = value,
            "l_fl_max" => self.max_floor_length = value,
            "h_wa_min" => self.min_wall_height = value,
            "h_wa_max" => self.max_wall_height = value,
            "t_wa_max" => self.max_wall_thickness = value,
            "h_do" => self.door_height = value,
            "w_do_min" => self.min_door_width = value,
            "l_wi_min" => self.min_window_length = value,
            "n_re_min" => self.min_rebar_count = int(value)?,
            "d_re" => self.rebar_diameter = value,
            "s_re_min" => self.min_rebar_spacing = value,
            "C_re" => self.rebar_unit_cost = value,
            "E_re" => self.rebar_embodied_energy = value,
            "rho_re" => self.rebar_linear_density = value,
            "P_L" => self.live_load = value,
            "P_design" => self.design_wind_pressure = value,
            "C_f" => self.wind_coefficient = value,
            "C" => self.seismic_c = value,
            "Z" => self.seismic_z = value,
            "I" => self.seismic_i = value,
            "K" => self.seismic_k = value,
            "tau_allw" => self.allowable_shear = value * MPA,
            "sigma_t_allw" => self.allowable_tension = value * MPA,
            "g" => self.gravity = value,
            "A_be" => self.beam_area = value,
            "A_ra" => self.rafter_area = value,
            "w_be" => self.beam_width = value,
            "s_be_max" => self.max_beam_spacing = value,
            "R_be" => self.rafter_ratio = value,
            "R_co" => self.cover_ratio = value,
            "n_slc_min" => self.min_slices = int(value)?,
            "n_slc_max" => self.max_slices = int(value)?,
            "h_fo" => self.foundation_height = value,
            "B_fo" => self.foundation_width = value,
            "B_avail" => self.budget = Some(value),
            other => return Err(ParamError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies a set of overrides and re-validates.
    pub fn with_overrides(&self, overrides: &BTreeMap<String, f64>) -> Result<Self, ParamError> {
        let mut p = *self;
        for (k, v) in overrides {
            p.set(k, *v)?;
        }
        p.validate()?;
        Ok(p)
    }

    /// Parses a `key=value` override document (one pair per line, `#`
    /// comments and blank lines ignored).
    pub fn parse_overrides(text: &str) -> Result<BTreeMap<String, f64>, ParamError> {
        let mut out = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ParamError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            let key = key.trim();
            if !PARAM_KEYS.contains(&key) {
                return Err(ParamError::UnknownKey(key.to_string()));
            }
            let value = value.trim();
            let v: f64 = value.parse().map_err(|_| ParamError::NotANumber {
                key: key.to_string(),
                value: value.to_string(),
            })?;
            out.insert(key.to_string(), v);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = BuildingParams::default();
        p.validate().unwrap();
        assert!((p.seismic_coefficient() - 0.352).abs() < 1e-12);
        assert!((p.wall_big_m() - 2.5).abs() < 1e-12);
        assert_eq!(p.allowable_shear, 5.0e5);
    }

    #[test]
    fn override_document() {
        let doc = "# site survey\nB_fo=0.81\n tau_allw = 0.6 \n\nn_slc_max=12\n";
        let o = BuildingParams::parse_overrides(doc).unwrap();
        let p = BuildingParams::default().with_overrides(&o).unwrap();
        assert_eq!(p.foundation_width, 0.81);
        assert!((p.allowable_shear - 6.0e5).abs() < 1e-6);
        assert_eq!(p.max_slices, 12);
    }

    #[test]
    fn unknown_and_malformed_keys_rejected() {
        assert_eq!(
            BuildingParams::parse_overrides("B_foo=1").unwrap_err(),
            ParamError::UnknownKey("B_foo".into())
        );
        assert!(matches!(
            BuildingParams::parse_overrides("B_fo 0.8").unwrap_err(),
            ParamError::Syntax { line: 1, .. }
        ));
        assert!(matches!(
            BuildingParams::parse_overrides("B_fo=wide").unwrap_err(),
            ParamError::NotANumber { .. }
        ));
        let mut o = BTreeMap::new();
        o.insert("n_rm".to_string(), 2.5);
        assert!(matches!(
            BuildingParams::default().with_overrides(&o).unwrap_err(),
            ParamError::NotAnInteger { .. }
        ));
    }

    #[test]
    fn inverted_bounds_rejected() {
        let mut o = BTreeMap::new();
        o.insert("h_wa_min".to_string(), 4.0);
        assert!(matches!(
            BuildingParams::default().with_overrides(&o).unwrap_err(),
            ParamError::Invalid(_)
        ));
    }

    #[test]
    fn every_key_is_settable() {
        for key in PARAM_KEYS {
            let mut p = BuildingParams::default();
            p.set(key, 3.0).unwrap();
        }
    }

    #[test]
    fn rebar_capacity() {
        // 2·0.012 + 1·0.05 fits in 1.1 m many times over
        assert_eq!(BuildingParams::default().max_rebar_count(), 18);
    }
}
