#![allow(dead_code)]

use rebuild_core::materials::{ComponentClass, MaterialCatalog};
use rebuild_core::model::DiscreteAssignment;

/// Case-study assignment from material names.
pub fn assignment(names: [&str; 4], n_slc: u32, x_e: bool, x_wa: bool) -> DiscreteAssignment {
    let c = MaterialCatalog::case_study();
    let get = |class, name| c.get(class, name).unwrap_or_else(|| panic!("{name}")).clone();
    DiscreteAssignment {
        wall: get(ComponentClass::Wall, names[0]),
        foundation: get(ComponentClass::Foundation, names[1]),
        roof: get(ComponentClass::Roof, names[2]),
        cover: get(ComponentClass::RoofCover, names[3]),
        n_slc,
        n_re: 2,
        x_e,
        x_wa,
    }
}

/// Relative difference against a reference value.
pub fn rel(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs()
}
