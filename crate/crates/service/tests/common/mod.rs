#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{HeaderMap, Request, StatusCode};
use axum::Router;
use rebuild_service::api::{router, AppState};
use rebuild_service::store::Store;
use serde_json::Value;
use tower::ServiceExt;

pub struct App {
    pub state: Arc<AppState>,
    pub router: Router,
    pub dir: tempfile::TempDir,
}

pub fn app() -> App {
    let dir = tempfile::tempdir().unwrap();
    let state = AppState::new(Store::new(dir.path()), 2);
    App {
        router: router(state.clone()),
        state,
        dir,
    }
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.body))
    }

    pub fn job_id(&self) -> String {
        self.headers["x-job-id"].to_str().unwrap().to_string()
    }
}

impl App {
    pub async fn call(&self, method: &str, uri: &str, body: &str) -> Reply {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header("content-type", "application/json")
            .body(Body::from(body.to_string()))
            .unwrap();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let headers = resp.headers().clone();
        let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
        Reply {
            status,
            headers,
            body: String::from_utf8(bytes.to_vec()).unwrap(),
        }
    }

    pub async fn get(&self, uri: &str) -> Reply {
        self.call("GET", uri, "").await
    }

    pub async fn post(&self, uri: &str, body: &str) -> Reply {
        self.call("POST", uri, body).await
    }

    /// Submits a sweep and returns the finished job view.
    pub async fn sweep(&self, uri: &str, body: &str) -> Value {
        let r = self.post(uri, body).await;
        assert_eq!(r.status, StatusCode::ACCEPTED, "{}", r.body);
        let id = r.json()["id"].as_str().unwrap().to_string();
        assert_eq!(r.headers["location"], format!("/jobs/{id}").as_str());
        self.state.jobs.get(&id).unwrap().wait().await.ok();
        let done = self.get(&format!("/jobs/{id}")).await;
        assert_eq!(done.status, StatusCode::OK);
        done.json()
    }
}
