//! HTTP routes. Sweeps run as background jobs polled through `/jobs/{id}`;
//! the other requests answer when their job finishes.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use rebuild_core::canonical;
use rebuild_core::materials::MaterialCatalog;
use rebuild_core::minlp::ScenarioSpec;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::jobs::{Job, JobStore};
use crate::ops::{self, Engines, ErrorBody, Kind, OpError, Prepared, Request};
use crate::store::{Meta, Store};

pub struct AppState {
    pub jobs: JobStore,
    pub engines: Engines,
    pub store: Store,
    pub workers: usize,
}

impl AppState {
    pub fn new(store: Store, workers: usize) -> Arc<Self> {
        Arc::new(AppState {
            jobs: JobStore::default(),
            engines: Engines::default(),
            store,
            workers,
        })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/materials", get(materials))
        .route("/scenario", post(scenario))
        .route("/solve", post(solve))
        .route("/pareto", post(pareto))
        .route("/area-sweep", post(area_sweep))
        .route("/min-bfo", post(min_bfo))
        .route("/price-what-if", post(price_what_if))
        .route("/jobs/{id}", get(job))
        .with_state(state)
}

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn status_of(e: &ErrorBody) -> StatusCode {
    match e.error.as_str() {
        "invalid_request" => StatusCode::BAD_REQUEST,
        "not_found" => StatusCode::NOT_FOUND,
        "infeasible" | "infeasible_scenario" => StatusCode::UNPROCESSABLE_ENTITY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

fn error(e: ErrorBody) -> Response {
    json(status_of(&e), canonical::to_string(&e))
}

fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, ErrorBody> {
    serde_json::from_slice(body).map_err(|e| OpError::Invalid(e.to_string()).body())
}

fn ok<T: Serialize>(value: &T) -> Response {
    json(StatusCode::OK, canonical::to_string(value))
}

async fn materials() -> Response {
    ok(&MaterialCatalog::case_study().rows())
}

#[derive(Serialize)]
struct ScenarioSummary {
    assignments: usize,
    fingerprint: String,
    materials: Vec<String>,
}

async fn scenario(State(st): State<Arc<AppState>>, body: Bytes) -> Response {
    let spec: ScenarioSpec = match parse(&body) {
        Ok(s) => s,
        Err(e) => return error(e),
    };
    let resolved = match spec.resolve(None) {
        Ok(s) => s,
        Err(e) => return error(OpError::from(e).body()),
    };
    let fingerprint = resolved.fingerprint();
    if let Err(e) = st.store.save_scenario(&fingerprint, &spec) {
        return error(OpError::Io(e.to_string()).body());
    }
    ok(&ScenarioSummary {
        assignments: resolved.enumerate().len(),
        fingerprint,
        materials: resolved.catalog.rows().into_iter().map(|r| r.name).collect(),
    })
}

/// Runs a job to completion on its own solver pool and stores fronts.
fn run(st: &AppState, job: &Job, p: &Prepared) {
    job.set_running();
    let pool = ops::pool(st.workers);
    let result = catch_unwind(AssertUnwindSafe(|| {
        pool.install(|| ops::execute(p, &st.engines, &job.progress))
    }));
    let result = match result {
        Ok(r) => r,
        Err(_) => Err(OpError::Io("solver panicked".into())),
    };
    match result {
        Ok(outcome) if matches!(job.kind, Kind::Pareto | Kind::AreaSweep) => {
            match st.store.save_front(&outcome, &Meta::new(p, st.workers)) {
                Ok(dir) => job.finish(Ok(outcome), Some(dir.display().to_string())),
                Err(e) => job.finish(Err(OpError::Io(e.to_string()).body()), None),
            }
        }
        Ok(outcome) => job.finish(Ok(outcome), None),
        Err(e) => job.finish(Err(e.body()), None),
    }
}

/// The job for a request, started when new.
fn submit(st: &Arc<AppState>, request: Request) -> Result<Arc<Job>, ErrorBody> {
    let prepared = ops::prepare(request, None).map_err(|e| e.body())?;
    let (job, fresh) =
        st.jobs
            .get_or_create(&prepared.fingerprint, prepared.request.kind(), &prepared.scenario_fingerprint);
    if fresh {
        let st = st.clone();
        let j = job.clone();
        tokio::task::spawn_blocking(move || run(&st, &j, &prepared));
    }
    Ok(job)
}

async fn answer(st: Arc<AppState>, request: Request) -> Response {
    let job = match submit(&st, request) {
        Ok(j) => j,
        Err(e) => return error(e),
    };
    let mut resp = match job.wait().await {
        Ok(o) => json(StatusCode::OK, o.json.clone()),
        Err(e) => error(e),
    };
    if let Ok(v) = HeaderValue::from_str(&job.id) {
        resp.headers_mut().insert("x-job-id", v);
    }
    resp
}

async fn enqueue(st: Arc<AppState>, request: Request) -> Response {
    let job = match submit(&st, request) {
        Ok(j) => j,
        Err(e) => return error(e),
    };
    let mut resp = json(StatusCode::ACCEPTED, job.view_json());
    if let Ok(v) = HeaderValue::from_str(&format!("/jobs/{}", job.id)) {
        resp.headers_mut().insert(header::LOCATION, v);
    }
    resp
}

async fn solve(State(st): State<Arc<AppState>>, body: Bytes) -> Response {
    match parse(&body) {
        Ok(r) => answer(st, Request::Solve(r)).await,
        Err(e) => error(e),
    }
}

async fn min_bfo(State(st): State<Arc<AppState>>, body: Bytes) -> Response {
    match parse(&body) {
        Ok(r) => answer(st, Request::MinBfo(r)).await,
        Err(e) => error(e),
    }
}

async fn price_what_if(State(st): State<Arc<AppState>>, body: Bytes) -> Response {
    match parse(&body) {
        Ok(r) => answer(st, Request::PriceWhatIf(r)).await,
        Err(e) => error(e),
    }
}

async fn pareto(State(st): State<Arc<AppState>>, body: Bytes) -> Response {
    match parse(&body) {
        Ok(r) => enqueue(st, Request::Pareto(r)).await,
        Err(e) => error(e),
    }
}

async fn area_sweep(State(st): State<Arc<AppState>>, body: Bytes) -> Response {
    match parse(&body) {
        Ok(r) => enqueue(st, Request::AreaSweep(r)).await,
        Err(e) => error(e),
    }
}

async fn job(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match st.jobs.get(&id) {
        Some(j) => json(StatusCode::OK, j.view_json()),
        None => error(ErrorBody {
            error: "not_found".into(),
            message: format!("unknown job {id}"),
        }),
    }
}

/// Serves the API until the process stops.
pub async fn serve(state: Arc<AppState>, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}
