//! Grouping front points into labelled design families.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::MaterialTuple;

use super::ParetoFront;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    fn point(x: f64) -> Self {
        Range { min: x, max: x }
    }

    fn include(&mut self, x: f64) {
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }
}

/// Front points sharing the material tuple and slice count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCluster {
    pub label: String,
    pub materials: MaterialTuple,
    pub n_slc: u32,
    /// USD
    pub cost: Range,
    /// GJ
    pub ee: Range,
    /// door width (m)
    pub w_do: Range,
    /// window side (m)
    pub l_wi: Range,
    /// total wall volume (m³)
    pub v_wa_tot: Range,
    /// indices into the front's points
    pub members: Vec<usize>,
}

/// `A`..`Z`, then `AA`, `AB`, ...
fn label(mut k: usize) -> String {
    let mut s = Vec::new();
    loop {
        s.push(b'A' + (k % 26) as u8);
        if k < 26 {
            break;
        }
        k = k / 26 - 1;
    }
    s.reverse();
    String::from_utf8(s).expect("ascii")
}

/// Groups by (material tuple, n_slc) and labels the groups in ascending
/// order of their cheapest member.
pub fn cluster_designs(front: &ParetoFront) -> Vec<DesignCluster> {
    let mut groups: BTreeMap<(MaterialTuple, u32), DesignCluster> = BTreeMap::new();
    for (i, p) in front.points.iter().enumerate() {
        let d = &p.design;
        let (w_do, l_wi, v) = (d.point.w_do, d.point.l_wi, d.state.v_wa_tot);
        groups
            .entry((d.material_tuple(), d.assign.n_slc))
            .and_modify(|c| {
                c.cost.include(p.cost);
                c.ee.include(p.ee);
                c.w_do.include(w_do);
                c.l_wi.include(l_wi);
                c.v_wa_tot.include(v);
                c.members.push(i);
            })
            .or_insert_with(|| DesignCluster {
                label: String::new(),
                materials: d.material_tuple(),
                n_slc: d.assign.n_slc,
                cost: Range::point(p.cost),
                ee: Range::point(p.ee),
                w_do: Range::point(w_do),
                l_wi: Range::point(l_wi),
                v_wa_tot: Range::point(v),
                members: vec![i],
            });
    }
    let mut out: Vec<DesignCluster> = groups.into_values().collect();
    out.sort_by(|a, b| a.cost.min.total_cmp(&b.cost.min).then(a.members[0].cmp(&b.members[0])));
    for (k, c) in out.iter_mut().enumerate() {
        c.label = label(k);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::label;

    #[test]
    fn labels() {
        assert_eq!(label(0), "A");
        assert_eq!(label(8), "I");
        assert_eq!(label(25), "Z");
        assert_eq!(label(26), "AA");
        assert_eq!(label(27), "AB");
        assert_eq!(label(26 + 26 * 26), "AAA");
    }
}
