mod common;

use axum::http::StatusCode;
use rebuild_core::minlp::ScenarioConfig;
use rebuild_core::pareto::FrontDocument;
use serde_json::{json, Value};

use common::app;

#[tokio::test]
async fn materials_lists_the_case_study_catalog() {
    let a = app();
    let r = a.get("/materials").await;
    assert_eq!(r.status, StatusCode::OK);
    let v = r.json();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|m| m["name"].as_str().unwrap()).collect();
    assert_eq!(names.len(), 12);
    for n in ["St1", "St2", "Br1", "Br2", "Co1", "Co2", "So1", "So2", "Wo", "Ba", "Pl"] {
        assert!(names.contains(&n), "{n}");
    }
}

#[tokio::test]
async fn scenario_validation() {
    let a = app();
    let r = a.post("/scenario", "{}").await;
    assert_eq!(r.status, StatusCode::OK);
    let fp = ScenarioConfig::case_study().fingerprint();
    assert_eq!(r.json()["fingerprint"], fp.as_str());
    assert_eq!(r.json()["assignments"], 19_456);
    assert!(a.dir.path().join("scenarios").join(format!("{fp}.json")).exists());

    let r = a.post("/scenario", r#"{"exclude_materials": ["Wo", "Ba"]}"#).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["message"], "empty class set: roof");
    assert_eq!(r.json()["error"], "infeasible_scenario");

    for bad in [r#"{"budget": 3}"#, "not json", r#"{"param_overrides": {"colour": 1}}"#] {
        let r = a.post("/scenario", bad).await;
        assert_eq!(r.status, StatusCode::BAD_REQUEST, "{bad}: {}", r.body);
        assert_eq!(r.json()["error"], "invalid_request");
    }
}

#[tokio::test]
async fn unknown_job_is_not_found() {
    let r = app().get("/jobs/nope").await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(r.json()["error"], "not_found");
}

#[tokio::test]
async fn solve_errors() {
    let a = app();
    let r = a.post("/solve", r#"{"budget": 0}"#).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["error"], "infeasible");
    for bad in [r#"{"budget": "cheap"}"#, r#"{"budjet": 5000}"#, r#"{"goal": "fastest"}"#] {
        assert_eq!(a.post("/solve", bad).await.status, StatusCode::BAD_REQUEST, "{bad}");
    }
    let r = a.post("/pareto", r#"{"budget_min": 9000, "budget_max": 4500}"#).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    let r = a.post("/area-sweep", r#"{"budget": 7000, "area_min": 30, "area_max": 31, "steps": 2}"#).await;
    assert_eq!(r.status, StatusCode::ACCEPTED);
}

#[tokio::test]
async fn cached_and_fresh_solves_are_identical() {
    let a = app();
    let body = r#"{"budget": 6414}"#;
    let first = a.post("/solve", body).await;
    assert_eq!(first.status, StatusCode::OK, "{}", first.body);
    let again = a.post("/solve", body).await;
    assert_eq!(first.job_id(), again.job_id());
    assert_eq!(first.body, again.body);
    assert_eq!(a.state.jobs.len(), 1);

    let fresh = app().post("/solve", body).await;
    assert_eq!(fresh.body, first.body);
    let d = first.json();
    assert_eq!(d["assign"]["wall"]["name"], "So2");
    assert!((d["ee"].as_f64().unwrap() - 326.0).abs() < 6.5);

    // a different seed is a different scenario and a different job
    let seeded = a.post("/solve", r#"{"budget": 6414, "scenario": {"solver": {"seed": 9}}}"#).await;
    assert_ne!(seeded.job_id(), first.job_id());

    let view = a.get(&format!("/jobs/{}", first.job_id())).await.json();
    assert_eq!(view["status"], "done");
    assert_eq!(view["kind"], "solve");
    assert_eq!(view["result"], d);
}

#[tokio::test]
async fn default_pareto_job_has_nine_clusters() {
    let a = app();
    let view = a.sweep("/pareto", "{}").await;
    assert_eq!(view["status"], "done", "{view}");
    let doc: FrontDocument = serde_json::from_value(view["result"].clone()).unwrap();
    assert_eq!(doc.clusters.len(), 9);
    assert!(doc.front.is_valid());
    let progress = &view["progress"];
    assert_eq!(progress["solved"], progress["planned"]);
    assert!(progress["solved"].as_u64().unwrap() >= 150);

    let dir = std::path::PathBuf::from(view["result_ref"].as_str().unwrap());
    for f in ["front.csv", "front.json", "meta.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let stored = std::fs::read_to_string(dir.join("front.json")).unwrap();
    assert_eq!(serde_json::from_str::<Value>(&stored).unwrap(), view["result"]);
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 0);
    assert_eq!(meta["request"]["steps"], 150);
    assert_eq!(meta["scenario_fingerprint"], view["scenario_fingerprint"]);

    // resubmitting returns the finished job
    let r = a.post("/pareto", "{}").await;
    assert_eq!(r.json()["id"], view["id"]);
    assert_eq!(r.json()["status"], "done");

    // price what-if at the catalog price leaves the front in place
    let front = &view["result"]["front"];
    let same = a
        .post("/price-what-if", &json!({"front": front, "material": "So2", "price": 145}).to_string())
        .await;
    assert_eq!(same.status, StatusCode::OK, "{}", same.body);
    assert_eq!(same.json()["shifted"], view["result"]);
    assert_eq!(same.json()["thresholds"], json!([]));

    let moved = a
        .post(
            "/price-what-if",
            &json!({"front": front, "material": "So2", "price": 214.56, "budget": 8000}).to_string(),
        )
        .await
        .json();
    let thresholds = moved["thresholds"].as_array().unwrap();
    let e = thresholds
        .iter()
        .find(|t| (t["cost"].as_f64().unwrap() - 6414.0).abs() < 1.0)
        .expect("design at 6,414 uses So2");
    assert!((e["price"].as_f64().unwrap() - 214.56).abs() < 0.5);
    assert!(thresholds.iter().all(|t| t["design"].as_str().unwrap().starts_with("So2")));
}

#[tokio::test]
async fn area_sweep_job() {
    let a = app();
    let view = a
        .sweep("/area-sweep", r#"{"budget": 7000, "area_min": 11.5, "area_max": 12.5, "steps": 3, "refine_depth": 1}"#)
        .await;
    assert_eq!(view["status"], "done", "{view}");
    assert_eq!(view["kind"], "area_sweep");
    let doc: FrontDocument = serde_json::from_value(view["result"].clone()).unwrap();
    assert!(doc.front.len() >= 2);
    assert_eq!(doc.front.axis, rebuild_core::pareto::AxisMode::AreaVsEe);

    let failed = a.sweep("/area-sweep", r#"{"budget": 7000, "area_min": 30, "area_max": 31, "steps": 2}"#).await;
    assert_eq!(failed["status"], "failed");
    assert_eq!(failed["error"]["error"], "infeasible");
    assert!(failed["result"].is_null());
}

#[tokio::test]
async fn min_bfo_endpoint() {
    let a = app();
    let r = a.post("/min-bfo", r#"{"wall": "St2"}"#).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.body);
    let w = r.json()["width"].as_f64().unwrap();
    assert!((w - 0.81).abs() <= 0.01, "{w}");
    let r = a.post("/min-bfo", r#"{"wall": "Tin"}"#).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY, "{}", r.body);
}

