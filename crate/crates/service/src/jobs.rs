//! Job records keyed by request fingerprint. A repeated request returns
//! the existing record; finished results never change.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rebuild_core::pareto::Progress;
use serde::Serialize;
use serde_json::value::RawValue;
use tokio::sync::watch;

use crate::ops::{ErrorBody, Kind, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone)]
struct State {
    status: Status,
    outcome: Option<Arc<Outcome>>,
    error: Option<ErrorBody>,
    result_ref: Option<String>,
    elapsed_s: Option<f64>,
}

pub struct Job {
    pub id: String,
    pub kind: Kind,
    pub scenario_fingerprint: String,
    pub progress: Progress,
    submitted: Instant,
    state: Mutex<State>,
    done: watch::Sender<bool>,
}

/// Finished job: the outcome or the error that stopped it.
pub type Finished = Result<Arc<Outcome>, ErrorBody>;

#[derive(Serialize)]
struct ProgressView {
    planned: usize,
    solved: usize,
}

/// Wire form of a job. Fields are declared in key order so the output is
/// canonical apart from the embedded result, which is canonical already.
#[derive(Serialize)]
pub struct JobView<'a> {
    elapsed_s: Option<f64>,
    error: Option<ErrorBody>,
    id: &'a str,
    kind: Kind,
    progress: ProgressView,
    result: Option<&'a RawValue>,
    result_ref: Option<String>,
    scenario_fingerprint: &'a str,
    status: Status,
}

impl Job {
    pub fn status(&self) -> Status {
        self.state.lock().expect("job state").status
    }

    pub fn set_running(&self) {
        self.state.lock().expect("job state").status = Status::Running;
    }

    pub fn finish(&self, result: Result<Outcome, ErrorBody>, result_ref: Option<String>) {
        {
            let mut s = self.state.lock().expect("job state");
            s.elapsed_s = Some(self.submitted.elapsed().as_secs_f64());
            s.result_ref = result_ref;
            match result {
                Ok(o) => {
                    s.status = Status::Done;
                    s.outcome = Some(Arc::new(o));
                }
                Err(e) => {
                    s.status = Status::Failed;
                    s.error = Some(e);
                }
            }
        }
        self.done.send_replace(true);
    }

    pub fn finished(&self) -> Option<Finished> {
        let s = self.state.lock().expect("job state");
        match s.status {
            Status::Done => s.outcome.clone().map(Ok),
            Status::Failed => s.error.clone().map(Err),
            _ => None,
        }
    }

    /// Waits until the job has finished.
    pub async fn wait(&self) -> Finished {
        let mut rx = self.done.subscribe();
        rx.wait_for(|d| *d).await.expect("sender lives in the job");
        self.finished().expect("finished jobs hold a result")
    }

    /// Serialized [`JobView`].
    pub fn view_json(&self) -> String {
        let s = self.state.lock().expect("job state").clone();
        let raw = s
            .outcome
            .as_ref()
            .map(|o| RawValue::from_string(o.json.clone()).expect("canonical JSON"));
        let view = JobView {
            elapsed_s: s.elapsed_s,
            error: s.error,
            id: &self.id,
            kind: self.kind,
            progress: ProgressView {
                planned: self.progress.planned(),
                solved: self.progress.solved(),
            },
            result: raw.as_deref(),
            result_ref: s.result_ref,
            scenario_fingerprint: &self.scenario_fingerprint,
            status: s.status,
        };
        serde_json::to_string(&view).expect("views serialize")
    }
}

#[derive(Default)]
pub struct JobStore {
    jobs: Mutex<HashMap<String, Arc<Job>>>,
}

impl JobStore {
    /// The job for `id`, created when absent. The flag is true for a new
    /// job, which the caller must then run.
    pub fn get_or_create(&self, id: &str, kind: Kind, scenario_fingerprint: &str) -> (Arc<Job>, bool) {
        let mut jobs = self.jobs.lock().expect("job map");
        if let Some(j) = jobs.get(id) {
            return (j.clone(), false);
        }
        let job = Arc::new(Job {
            id: id.to_string(),
            kind,
            scenario_fingerprint: scenario_fingerprint.to_string(),
            progress: Progress::new(),
            submitted: Instant::now(),
            state: Mutex::new(State {
                status: Status::Queued,
                outcome: None,
                error: None,
                result_ref: None,
                elapsed_s: None,
            }),
            done: watch::Sender::new(false),
        });
        jobs.insert(id.to_string(), job.clone());
        (job, true)
    }

    pub fn get(&self, id: &str) -> Option<Arc<Job>> {
        self.jobs.lock().expect("job map").get(id).cloned()
    }

    pub fn len(&self) -> usize {
        self.jobs.lock().expect("job map").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
