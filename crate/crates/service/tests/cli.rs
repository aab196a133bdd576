mod common;

use std::process::Command;

use clap::Parser;
use rebuild_service::cli::{self, Cli};
use serde_json::Value;

use common::app;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rebuild"))
}

fn run_cli(args: &[&str]) -> (String, rebuild_service::ops::Outcome) {
    let cli = Cli::try_parse_from(std::iter::once("rebuild").chain(args.iter().copied())).unwrap();
    cli::execute(&cli).unwrap()
}

#[test]
fn infeasible_budget_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["solve", "--budget", "0"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "infeasible");
}

#[test]
fn malformed_input_exits_with_code_four() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.json"), r#"{"budget": 1}"#).unwrap();
    let out = bin()
        .args(["solve", "--scenario", "s.json"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "invalid_request");

    let out = bin().args(["solve", "--budget", "lots"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn min_bfo_prints_the_width() {
    let out = bin().args(["min-bfo", "--wall", "St2"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "0.81\n");
}

#[test]
fn workers_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["pareto", "--budget-min", "6414", "--budget-max", "6414", "--steps", "1", "--data-dir"])
        .arg(dir.path())
        .env("REBUILD_WORKERS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().contains(",So2,Br2,Wo,Pl,7,"));
    let results: Vec<_> = std::fs::read_dir(dir.path().join("results")).unwrap().collect();
    assert_eq!(results.len(), 1);
    let meta = results[0].as_ref().unwrap().path().join("meta.json");
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(meta).unwrap()).unwrap();
    assert_eq!(meta["workers"], 3);
}

#[tokio::test]
async fn cli_and_http_agree() {
    let a = app();
    let data = tempfile::tempdir().unwrap();
    let d = data.path().to_str().unwrap();
    let scenario = data.path().join("no-soil.json");
    std::fs::write(&scenario, r#"{"exclude_materials": ["So1", "So2"]}"#).unwrap();
    let s = scenario.to_str().unwrap();

    let (_, solve) = run_cli(&["--seed", "4", "solve", "--scenario", s, "--budget", "6000"]);
    let http = a
        .post("/solve", r#"{"budget": 6000, "scenario": {"exclude_materials": ["So1", "So2"], "solver": {"seed": 4}}}"#)
        .await;
    assert_eq!(http.body, solve.json);

    let (_, cost) = run_cli(&["solve", "--goal", "min-cost", "--energy-cap", "700"]);
    let http = a.post("/solve", r#"{"goal": "min_cost", "energy_cap": 700}"#).await;
    assert_eq!(http.body, cost.json);

    let (csv, front) = run_cli(&[
        "--data-dir", d, "pareto", "--budget-min", "6000", "--budget-max", "6600", "--steps", "3",
    ]);
    let view = a.sweep("/pareto", r#"{"budget_min": 6000, "budget_max": 6600, "steps": 3}"#).await;
    assert_eq!(view["result"], serde_json::from_str::<Value>(&front.json).unwrap());
    assert_eq!(Some(csv), front.csv);
    // both front ends file the result under the same job
    let job = view["id"].as_str().unwrap();
    let ours = data.path().join("results").join(job).join("front.json");
    assert_eq!(std::fs::read_to_string(ours).unwrap(), front.json);

    let front_file = data.path().join("results").join(job).join("front.json");
    let (_, what_if) = run_cli(&[
        "price-what-if", "--front", front_file.to_str().unwrap(), "--material", "So2", "--price", "180",
        "--budget", "7000",
    ]);
    let body = serde_json::json!({
        "front": view["result"]["front"], "material": "So2", "price": 180, "budget": 7000
    });
    let http = a.post("/price-what-if", &body.to_string()).await;
    assert_eq!(http.body, what_if.json);

    let (_, area) = run_cli(&[
        "--data-dir", d, "area-sweep", "--budget", "7000", "--area-min", "10", "--area-max", "10.5", "--steps", "2",
    ]);
    let view = a.sweep("/area-sweep", r#"{"budget": 7000, "area_min": 10, "area_max": 10.5, "steps": 2}"#).await;
    assert_eq!(view["result"], serde_json::from_str::<Value>(&area.json).unwrap());

    let (text, width) = run_cli(&["min-bfo", "--wall", "Br2", "--format", "json"]);
    let http = a.post("/min-bfo", r#"{"wall": "Br2"}"#).await;
    assert_eq!(http.body, width.json);
    assert_eq!(text, format!("{}\n", width.json));
}
