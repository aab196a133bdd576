use std::sync::OnceLock;

use rebuild_core::minlp::{Design, Engine, Rule, ScenarioConfig};
use rebuild_core::pareto::{
    cluster_designs, epsilon_constraint_front, epsilon_constraint_front_tracked, floor_area_front,
    front_csv, front_json, price_shift, price_threshold, AxisMode, FrontDocument, ParetoFront,
    PriceError, Progress, SweepOptions, CSV_HEADER,
};

fn engine() -> &'static Engine {
    static E: OnceLock<Engine> = OnceLock::new();
    E.get_or_init(|| Engine::new(ScenarioConfig::case_study()))
}

fn design_e() -> Design {
    engine().solve_minlp(Some(6414.0)).unwrap()
}

/// A short front across the soil-wall switch.
fn small_front() -> &'static ParetoFront {
    static F: OnceLock<ParetoFront> = OnceLock::new();
    F.get_or_init(|| epsilon_constraint_front(engine(), 6000.0, 6600.0, 7, SweepOptions::default()))
}

#[test]
fn collapsed_range_is_one_solve() {
    let f = epsilon_constraint_front(engine(), 6414.0, 6414.0, 2, SweepOptions::default());
    assert_eq!(f.len(), 1);
    assert_eq!(f.points[0].design, design_e());
    assert_eq!(f.axis, AxisMode::CostVsEe);
    assert_eq!(f.scenario_fingerprint, engine().fingerprint());
}

#[test]
fn sweep_front_is_a_staircase() {
    let f = small_front();
    assert!(f.is_valid());
    assert!(f.len() >= 2);
    for w in f.points.windows(2) {
        assert!(w[0].cost < w[1].cost && w[0].ee > w[1].ee);
    }
    // refinement found the brick-to-soil switch
    let walls: Vec<String> = f.points.iter().map(|p| p.design.assign.wall.name.clone()).collect();
    assert!(walls.contains(&"Br2".to_string()) && walls.contains(&"So2".to_string()));
}

#[test]
fn progress_counts_every_solve() {
    let progress = Progress::new();
    let f = epsilon_constraint_front_tracked(engine(), 6000.0, 6600.0, 7, SweepOptions::default(), &progress);
    assert_eq!(&f, small_front());
    assert_eq!(progress.solved(), progress.planned());
    // refinement added midpoints beyond the grid
    assert!(progress.planned() > 7, "{}", progress.planned());
}

#[test]
fn infeasible_sweep_is_empty() {
    let f = epsilon_constraint_front(engine(), 100.0, 200.0, 3, SweepOptions::default());
    assert!(f.is_empty());
}

#[test]
fn threshold_examples() {
    let e = design_e();
    assert!((price_threshold(&e, 8000.0, "So2").unwrap() - 214.56).abs() < 0.5);
    assert!((price_threshold(&e, 7000.0, "So2").unwrap() - 170.70).abs() < 0.1);
    assert!((price_threshold(&e, e.cost, "So2").unwrap() - 145.0).abs() < 1e-9);
    assert!(matches!(
        price_threshold(&e, 8000.0, "St1"),
        Err(PriceError::NotUsed { .. })
    ));
}

#[test]
fn shifting_prices() {
    let f = small_front();
    assert_eq!(&price_shift(f, "So2", 145.0), f);
    // a front reloaded from its rounded JSON is also a fixed point
    let reloaded: FrontDocument = serde_json::from_str(&front_json(f)).unwrap();
    assert_eq!(price_shift(&reloaded.front, "So2", 145.0), reloaded.front);
    let once = price_shift(f, "So2", 180.0);
    assert_eq!(price_shift(&once, "So2", 180.0), once);
    assert!(once.is_valid());

    let e = design_e();
    let single = ParetoFront::from_designs(AxisMode::CostVsEe, "x", vec![e.clone()]);
    let up = price_shift(&single, "So2", 155.0);
    let moved = &up.points[0];
    assert!((moved.cost - (e.cost + 10.0 * e.state.v_wa_tot)).abs() < 1e-9);
    assert!((moved.cost - 6642.0).abs() < 2.0, "{}", moved.cost);
    assert_eq!(moved.ee, e.ee);
    assert_eq!(moved.design.assign.wall.unit_cost, 155.0);
}

#[test]
fn shifted_costs_match_a_repriced_scenario() {
    let base = ScenarioConfig::case_study();
    let catalog = base.catalog.with_price("So2", 180.0).unwrap();
    let repriced = ScenarioConfig::new(catalog, base.params, base.rules, base.solver, false).unwrap();
    let shifted = price_shift(small_front(), "So2", 180.0);
    for p in &shifted.points {
        let a = repriced
            .enumerate()
            .into_iter()
            .find(|a| a.key() == p.design.key())
            .unwrap();
        let d = Design::evaluate(&repriced.params, &a, &p.design.point, 0.0, p.design.provenance.clone());
        assert!((d.cost - p.cost).abs() <= 1e-9 * p.cost, "{} vs {}", d.cost, p.cost);
    }
    // the shifted soil design stays affordable after re-solving at its cost
    let e = price_shift(
        &ParetoFront::from_designs(AxisMode::CostVsEe, "x", vec![design_e()]),
        "So2",
        180.0,
    );
    let resolved = Engine::new(repriced).solve_minlp(Some(e.points[0].cost)).unwrap();
    assert!(resolved.ee <= e.points[0].ee * (1.0 + 1e-6));
}

#[test]
fn clusters() {
    let single = ParetoFront::from_designs(AxisMode::CostVsEe, "x", vec![design_e()]);
    let c = cluster_designs(&single);
    assert_eq!(c.len(), 1);
    assert_eq!(c[0].label, "A");
    assert_eq!(c[0].cost.min, c[0].cost.max);
    assert_eq!(c[0].materials, ["So2", "Br2", "Wo", "Pl"].map(String::from));

    let f = small_front();
    let cs = cluster_designs(f);
    for (k, c) in cs.iter().enumerate() {
        assert_eq!(c.label, ((b'A' + k as u8) as char).to_string());
        for &i in &c.members {
            assert_eq!(f.points[i].design.material_tuple(), c.materials);
            assert_eq!(f.points[i].design.assign.n_slc, c.n_slc);
        }
    }
    for w in cs.windows(2) {
        assert!(w[0].cost.min <= w[1].cost.min);
    }
}

#[test]
fn fixed_wall_fronts_keep_walls_apart() {
    let mut designs = Vec::new();
    for wall in ["Br2", "So2"] {
        let s = ScenarioConfig::case_study()
            .with_rules([Rule::FixWallMaterial(wall.into()), Rule::FixRoofMaterial("Wo".into())])
            .unwrap();
        let e = Engine::new(s);
        designs.extend(
            epsilon_constraint_front(&e, 4800.0, 6600.0, 4, SweepOptions { refine_depth: 0 })
                .points
                .into_iter()
                .map(|p| p.design),
        );
    }
    let combined = ParetoFront::from_designs(AxisMode::CostVsEe, "combined", designs);
    assert!(combined.is_valid());
    for c in cluster_designs(&combined) {
        let walls: std::collections::BTreeSet<&str> = c
            .members
            .iter()
            .map(|&i| combined.points[i].design.assign.wall.name.as_str())
            .collect();
        assert_eq!(walls.len(), 1);
    }
}

#[test]
fn identical_coordinates_become_alternatives() {
    let e = design_e();
    let mut twin = e.clone();
    twin.assign.x_e = !twin.assign.x_e;
    let f = ParetoFront::from_designs(AxisMode::CostVsEe, "x", vec![e.clone(), twin.clone(), e.clone()]);
    assert_eq!(f.len(), 1);
    assert_eq!(f.points[0].design, e);
    assert_eq!(f.points[0].alternatives, vec![twin]);
}

#[test]
fn area_front_below_the_minimum_area_is_one_family() {
    let f = floor_area_front(engine(), 7000.0, 9.0, 9.8, 3, SweepOptions::default()).unwrap();
    assert_eq!(f.axis, AxisMode::AreaVsEe);
    assert_eq!(f.len(), 1);
    assert!(f.points[0].floor_area >= 10.0 * (1.0 - 1e-6));
    assert!(floor_area_front(engine(), 7000.0, 30.0, 31.0, 2, SweepOptions::default()).is_err());
}

#[test]
fn exports() {
    let f = small_front();
    let csv = front_csv(f);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(lines.count(), f.len());
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), 15);
    assert_eq!(row[2], f.points[0].design.assign.wall.name);

    let json = front_json(f);
    let doc: FrontDocument = serde_json::from_str(&json).unwrap();
    assert_eq!(doc.front.len(), f.len());
    assert_eq!(doc.clusters.len(), cluster_designs(f).len());
    // canonical text is stable under a parse and re-render
    assert_eq!(front_json(&doc.front), json);
}
