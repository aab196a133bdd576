//! Closed-form price sensitivity on finished fronts.
//!
//! Cost is linear in every unit price with the volumes fixed, so a price
//! change moves each design horizontally by `volume · Δprice` without
//! touching embodied energy.

use thiserror::Error;

use crate::minlp::Design;

use super::{FrontPoint, ParetoFront};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PriceError {
    #[error("design {design} does not use material `{material}`")]
    NotUsed { design: String, material: String },
}

fn unit_price(d: &Design, material: &str) -> Option<f64> {
    let a = &d.assign;
    [&a.wall, &a.foundation, &a.roof, &a.cover]
        .into_iter()
        .find(|m| m.name == material)
        .map(|m| m.unit_cost)
}

/// Reprices `material` in one design from its stored volumes.
pub fn reprice(d: &Design, material: &str, new_price: f64) -> Design {
    let Some(old) = unit_price(d, material) else {
        return d.clone();
    };
    let mut out = d.clone();
    out.cost += d.volume_of(material) * (new_price - old);
    let a = &mut out.assign;
    for m in [&mut a.wall, &mut a.foundation, &mut a.roof, &mut a.cover] {
        if m.name == material {
            m.unit_cost = new_price;
        }
    }
    out
}

/// Every design on the front (alternatives included) repriced, then
/// filtered again. Nothing is re-solved, and each design keeps the floor
/// area recorded on its point.
pub fn price_shift(front: &ParetoFront, material: &str, new_price: f64) -> ParetoFront {
    let candidates = front.points.iter().flat_map(|p| {
        std::iter::once(&p.design)
            .chain(&p.alternatives)
            .map(move |d| {
                let d = reprice(d, material, new_price);
                FrontPoint {
                    cost: d.cost,
                    ee: d.ee,
                    floor_area: p.floor_area,
                    design: d,
                    alternatives: Vec::new(),
                }
            })
    });
    ParetoFront::merged(front.axis, &front.scenario_fingerprint, candidates)
}

/// Highest unit price of `material` at which `design` still fits `budget`.
pub fn price_threshold(design: &Design, budget: f64, material: &str) -> Result<f64, PriceError> {
    let old = unit_price(design, material).ok_or_else(|| PriceError::NotUsed {
        design: design.key().to_string(),
        material: material.to_string(),
    })?;
    Ok(old + (budget - design.cost) / design.volume_of(material))
}
