//! CSV and JSON renderings of a front.

use serde::{Deserialize, Serialize};

use crate::canonical;

use super::{cluster_designs, DesignCluster, ParetoFront};

pub const CSV_HEADER: [&str; 15] = [
    "cost_usd",
    "ee_GJ",
    "wall",
    "foundation",
    "roof",
    "cover",
    "n_slc",
    "w_do_m",
    "l_wi_m",
    "v_wa_tot_m3",
    "t_wa_m",
    "h_wa_m",
    "l_x_fl_m",
    "l_y_fl_m",
    "t_fo_m",
];

/// One row per front point, numbers in canonical formatting.
pub fn front_csv(front: &ParetoFront) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for p in &front.points {
        let d = &p.design;
        let x = &d.point;
        let n = canonical::number;
        let [wall, foundation, roof, cover] = d.material_tuple();
        w.write_record([
            n(p.cost),
            n(p.ee),
            wall,
            foundation,
            roof,
            cover,
            d.assign.n_slc.to_string(),
            n(x.w_do),
            n(x.l_wi),
            n(d.state.v_wa_tot),
            n(x.t_wa),
            n(x.h_wa),
            n(x.l_x_fl),
            n(x.l_y_fl),
            n(x.t_fo),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// The front with its clusters, as served to the explorer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontDocument {
    pub front: ParetoFront,
    pub clusters: Vec<DesignCluster>,
}

impl FrontDocument {
    pub fn new(front: ParetoFront) -> Self {
        let clusters = if front.is_empty() { Vec::new() } else { cluster_designs(&front) };
        FrontDocument { front, clusters }
    }
}

/// Canonical JSON of [`FrontDocument`].
pub fn front_json(front: &ParetoFront) -> String {
    canonical::to_string(&FrontDocument::new(front.clone()))
}
