//! Pareto fronts over cost (or floor area) and embodied energy.

mod cluster;
mod export;
mod price;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::minlp::Design;

pub use cluster::{cluster_designs, DesignCluster, Range};
pub use export::{front_csv, front_json, FrontDocument, CSV_HEADER};
pub use price::{price_shift, price_threshold, reprice, PriceError};
pub use sweep::{
    epsilon_constraint_front, epsilon_constraint_front_tracked, floor_area_front,
    floor_area_front_tracked, Progress, SweepOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisMode {
    /// minimize cost and embodied energy
    CostVsEe,
    /// maximize floor area, minimize embodied energy
    AreaVsEe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontPoint {
    /// USD
    pub cost: f64,
    /// GJ
    pub ee: f64,
    /// m² per room
    pub floor_area: f64,
    pub design: Design,
    /// other designs with exactly the same coordinates
    pub alternatives: Vec<Design>,
}

impl FrontPoint {
    pub fn new(design: Design) -> Self {
        FrontPoint {
            cost: design.cost,
            ee: design.ee,
            floor_area: design.point.floor_area(),
            design,
            alternatives: Vec::new(),
        }
    }

    /// Coordinates in minimization sense for the given axis.
    fn coords(&self, axis: AxisMode) -> (f64, f64) {
        match axis {
            AxisMode::CostVsEe => (self.cost, self.ee),
            AxisMode::AreaVsEe => (-self.floor_area, self.ee),
        }
    }

    /// First plotted coordinate.
    pub fn x(&self, axis: AxisMode) -> f64 {
        match axis {
            AxisMode::CostVsEe => self.cost,
            AxisMode::AreaVsEe => self.floor_area,
        }
    }
}

/// Nondominated designs sorted ascending by the first coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub axis: AxisMode,
    pub scenario_fingerprint: String,
    pub points: Vec<FrontPoint>,
}

impl ParetoFront {
    /// Builds a front from arbitrary designs: equal-coordinate designs
    /// are merged into one point (first one wins, the rest become
    /// alternatives), then dominated points are dropped.
    pub fn from_designs(axis: AxisMode, fingerprint: &str, designs: Vec<Design>) -> Self {
        ParetoFront::merged(axis, fingerprint, designs.into_iter().map(FrontPoint::new))
    }

    /// Folds points with equal coordinates into alternatives of the first,
    /// then filters.
    pub(crate) fn merged(
        axis: AxisMode,
        fingerprint: &str,
        candidates: impl IntoIterator<Item = FrontPoint>,
    ) -> Self {
        let mut points: Vec<FrontPoint> = Vec::new();
        for p in candidates {
            let c = p.coords(axis);
            match points.iter_mut().find(|q| q.coords(axis) == c) {
                Some(q) => {
                    if q.design.key() != p.design.key()
                        && q.alternatives.iter().all(|a| a.key() != p.design.key())
                    {
                        q.alternatives.push(p.design);
                    }
                }
                None => points.push(p),
            }
        }
        ParetoFront::from_points(axis, fingerprint, points)
    }

    fn from_points(axis: AxisMode, fingerprint: &str, points: Vec<FrontPoint>) -> Self {
        let tagged: Vec<(f64, f64, FrontPoint)> = points
            .into_iter()
            .map(|p| {
                let (a, b) = p.coords(axis);
                (a, b, p)
            })
            .collect();
        let mut kept: Vec<FrontPoint> = nondominated_filter(tagged).into_iter().map(|t| t.2).collect();
        if axis == AxisMode::AreaVsEe {
            kept.reverse();
        }
        ParetoFront {
            axis,
            scenario_fingerprint: fingerprint.to_string(),
            points: kept,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// No point dominates another and the first coordinate ascends.
    pub fn is_valid(&self) -> bool {
        let c: Vec<(f64, f64)> = self.points.iter().map(|p| p.coords(self.axis)).collect();
        let sorted = self
            .points
            .windows(2)
            .all(|w| w[0].x(self.axis) <= w[1].x(self.axis));
        let nondominated = c.iter().enumerate().all(|(i, p)| {
            c.iter()
                .enumerate()
                .all(|(j, q)| i == j || !dominates(*q, *p) && *q != *p)
        });
        sorted && nondominated
    }
}

/// `a` is no worse in both coordinates and strictly better in one.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

/// Keeps the points no other point dominates (both coordinates minimized).
/// Of several points with identical coordinates only the earliest in
/// input order survives. The result is sorted ascending by the first
/// coordinate, then the second.
pub fn nondominated_filter<T>(points: Vec<(f64, f64, T)>) -> Vec<(f64, f64, T)> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[i]
            .0
            .total_cmp(&points[j].0)
            .then(points[i].1.total_cmp(&points[j].1))
            .then(i.cmp(&j))
    });
    let mut keep = vec![false; points.len()];
    let mut best_b = f64::INFINITY;
    for &i in &order {
        if points[i].1 < best_b {
            keep[i] = true;
            best_b = points[i].1;
        }
    }
    let mut slots: Vec<Option<(f64, f64, T)>> = points.into_iter().map(Some).collect();
    order
        .into_iter()
        .filter(|&i| keep[i])
        .map(|i| slots[i].take().expect("each index once"))
        .collect()
}
