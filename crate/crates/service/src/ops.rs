//! Requests, results and errors shared by the command line and the HTTP
//! API. Both front ends call [`execute`], so equal requests produce equal
//! canonical JSON.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex};

use rebuild_core::canonical;
use rebuild_core::minlp::{
    min_feasible_foundation_width, Engine, Goal, MinlpError, Query, ScenarioConfig, ScenarioError,
    ScenarioSpec,
};
use rebuild_core::pareto::{
    epsilon_constraint_front_tracked, floor_area_front_tracked, front_csv, front_json,
    price_shift, price_threshold, FrontDocument, ParetoFront, Progress, SweepOptions,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Solve,
    Pareto,
    AreaSweep,
    MinBfo,
    PriceWhatIf,
}

fn default_goal() -> Goal {
    Goal::MinEnergy
}

fn default_budget_min() -> f64 {
    4500.0
}

fn default_budget_max() -> f64 {
    9000.0
}

fn default_budget_steps() -> usize {
    150
}

fn default_area_steps() -> usize {
    41
}

fn default_refine_depth() -> u32 {
    SweepOptions::default().refine_depth
}

/// One mixed-integer solve. Without a budget or cap the query is unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRequest {
    #[serde(default)]
    pub scenario: ScenarioSpec,
    #[serde(default = "default_goal")]
    pub goal: Goal,
    #[serde(default)]
    pub budget: Option<f64>,
    #[serde(default)]
    pub energy_cap: Option<f64>,
    #[serde(default)]
    pub min_floor_area: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParetoRequest {
    #[serde(default)]
    pub scenario: ScenarioSpec,
    #[serde(default = "default_budget_min")]
    pub budget_min: f64,
    #[serde(default = "default_budget_max")]
    pub budget_max: f64,
    #[serde(default = "default_budget_steps")]
    pub steps: usize,
    #[serde(default = "default_refine_depth")]
    pub refine_depth: u32,
}

impl Default for ParetoRequest {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields default")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaSweepRequest {
    #[serde(default)]
    pub scenario: ScenarioSpec,
    pub budget: f64,
    pub area_min: f64,
    pub area_max: f64,
    #[serde(default = "default_area_steps")]
    pub steps: usize,
    #[serde(default = "default_refine_depth")]
    pub refine_depth: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinBfoRequest {
    #[serde(default)]
    pub scenario: ScenarioSpec,
    pub wall: String,
}

/// Reprices one material on a finished front. With a budget, each design
/// using the material also gets the price at which it leaves the budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceWhatIfRequest {
    pub front: ParetoFront,
    pub material: String,
    pub price: f64,
    #[serde(default)]
    pub budget: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    /// index into the submitted front
    pub index: usize,
    pub design: String,
    pub cost: f64,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceWhatIfResult {
    pub material: String,
    pub price: f64,
    pub budget: Option<f64>,
    pub shifted: FrontDocument,
    pub thresholds: Vec<Threshold>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Request {
    Solve(SolveRequest),
    Pareto(ParetoRequest),
    AreaSweep(AreaSweepRequest),
    MinBfo(MinBfoRequest),
    PriceWhatIf(PriceWhatIfRequest),
}

impl Request {
    pub fn kind(&self) -> Kind {
        match self {
            Request::Solve(_) => Kind::Solve,
            Request::Pareto(_) => Kind::Pareto,
            Request::AreaSweep(_) => Kind::AreaSweep,
            Request::MinBfo(_) => Kind::MinBfo,
            Request::PriceWhatIf(_) => Kind::PriceWhatIf,
        }
    }

    fn scenario_spec(&self) -> Option<&ScenarioSpec> {
        match self {
            Request::Solve(r) => Some(&r.scenario),
            Request::Pareto(r) => Some(&r.scenario),
            Request::AreaSweep(r) => Some(&r.scenario),
            Request::MinBfo(r) => Some(&r.scenario),
            Request::PriceWhatIf(_) => None,
        }
    }

    pub fn scenario_spec_mut(&mut self) -> Option<&mut ScenarioSpec> {
        match self {
            Request::Solve(r) => Some(&mut r.scenario),
            Request::Pareto(r) => Some(&mut r.scenario),
            Request::AreaSweep(r) => Some(&mut r.scenario),
            Request::MinBfo(r) => Some(&mut r.scenario),
            Request::PriceWhatIf(_) => None,
        }
    }

    /// Checks the numbers a schema cannot express.
    pub fn validate(&self) -> Result<(), OpError> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(OpError::Invalid(format!("{name} must be a finite number")))
            }
        };
        let range = |name: &str, lo: f64, hi: f64| {
            finite(name, lo)?;
            finite(name, hi)?;
            if lo > hi {
                return Err(OpError::Invalid(format!("{name}: minimum {lo} exceeds maximum {hi}")));
            }
            Ok(())
        };
        let steps = |n: usize| {
            if n == 0 {
                Err(OpError::Invalid("steps must be at least 1".into()))
            } else {
                Ok(())
            }
        };
        match self {
            Request::Solve(r) => {
                for (name, x) in [
                    ("budget", r.budget),
                    ("energy_cap", r.energy_cap),
                    ("min_floor_area", r.min_floor_area),
                ] {
                    if let Some(x) = x {
                        finite(name, x)?;
                    }
                }
                Ok(())
            }
            Request::Pareto(r) => {
                range("budget", r.budget_min, r.budget_max)?;
                steps(r.steps)
            }
            Request::AreaSweep(r) => {
                finite("budget", r.budget)?;
                range("area", r.area_min, r.area_max)?;
                steps(r.steps)
            }
            Request::MinBfo(r) => {
                if r.wall.is_empty() {
                    return Err(OpError::Invalid("wall must name a material".into()));
                }
                Ok(())
            }
            Request::PriceWhatIf(r) => {
                finite("price", r.price)?;
                if r.price < 0.0 {
                    return Err(OpError::Invalid("price must not be negative".into()));
                }
                if let Some(b) = r.budget {
                    finite("budget", b)?;
                }
                Ok(())
            }
        }
    }
}

/// Machine-readable error object, written to stderr by the CLI and
/// returned as the body of failed HTTP requests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum OpError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Infeasible(#[from] MinlpError),
    #[error("{0}")]
    Io(String),
}

impl OpError {
    /// Whether the request was malformed rather than unsatisfiable.
    pub fn is_schema(&self) -> bool {
        match self {
            OpError::Invalid(_) => true,
            OpError::Scenario(e) => matches!(
                e,
                ScenarioError::Document(_) | ScenarioError::Params(_) | ScenarioError::Solver(_)
            ),
            OpError::Infeasible(_) | OpError::Io(_) => false,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            OpError::Io(_) => "io",
            _ if self.is_schema() => "invalid_request",
            OpError::Scenario(_) => "infeasible_scenario",
            _ => "infeasible",
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            error: self.code().to_string(),
            message: self.to_string(),
        }
    }

    /// Process exit status of the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            OpError::Io(_) => 1,
            _ if self.is_schema() => 4,
            _ => 3,
        }
    }
}

/// Engines shared between requests on the same scenario, so later queries
/// reuse the per-assignment anchors of earlier ones.
#[derive(Default)]
pub struct Engines(Mutex<HashMap<String, Arc<Engine>>>);

impl Engines {
    pub fn get(&self, scenario: ScenarioConfig) -> Arc<Engine> {
        let fp = scenario.fingerprint();
        let mut map = self.0.lock().expect("engine map");
        map.entry(fp)
            .or_insert_with(|| Arc::new(Engine::new(scenario)))
            .clone()
    }
}

/// A prepared request: validated, scenario resolved and fingerprinted.
pub struct Prepared {
    pub request: Request,
    pub scenario: Option<ScenarioConfig>,
    pub scenario_fingerprint: String,
    /// identity of (kind, scenario, parameters); the job id
    pub fingerprint: String,
}

pub fn prepare(request: Request, base: Option<&Path>) -> Result<Prepared, OpError> {
    request.validate()?;
    let scenario = request.scenario_spec().map(|s| s.resolve(base)).transpose()?;
    let scenario_fingerprint = match (&scenario, &request) {
        (Some(s), _) => s.fingerprint(),
        (None, Request::PriceWhatIf(r)) => r.front.scenario_fingerprint.clone(),
        (None, _) => unreachable!("only what-if requests lack a scenario"),
    };
    let mut params = serde_json::to_value(&request).expect("requests serialize");
    if let Value::Object(m) = &mut params {
        m.remove("scenario");
    }
    let fingerprint = canonical::fingerprint(&(&scenario_fingerprint, &params));
    Ok(Prepared {
        request,
        scenario,
        scenario_fingerprint,
        fingerprint,
    })
}

/// A finished operation in canonical JSON; fronts also carry their CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub json: String,
    pub csv: Option<String>,
}

/// Runs a prepared request on the current rayon pool.
pub fn execute(p: &Prepared, engines: &Engines, progress: &Progress) -> Result<Outcome, OpError> {
    let engine = || engines.get(p.scenario.clone().expect("resolved scenario"));
    let front = |f: ParetoFront| Outcome {
        json: front_json(&f),
        csv: Some(front_csv(&f)),
    };
    match &p.request {
        Request::Solve(r) => {
            let q = Query {
                goal: r.goal,
                budget: r.budget,
                energy_cap: r.energy_cap,
                min_floor_area: r.min_floor_area,
            };
            let d = engine().solve(&q)?;
            Ok(Outcome {
                json: canonical::to_string(&d),
                csv: None,
            })
        }
        Request::Pareto(r) => {
            let options = SweepOptions {
                refine_depth: r.refine_depth,
            };
            let f = epsilon_constraint_front_tracked(
                &engine(),
                r.budget_min,
                r.budget_max,
                r.steps,
                options,
                progress,
            );
            Ok(front(f))
        }
        Request::AreaSweep(r) => {
            let options = SweepOptions {
                refine_depth: r.refine_depth,
            };
            let f = floor_area_front_tracked(
                &engine(),
                r.budget,
                r.area_min,
                r.area_max,
                r.steps,
                options,
                progress,
            )?;
            Ok(front(f))
        }
        Request::MinBfo(r) => {
            let w = min_feasible_foundation_width(p.scenario.as_ref().expect("resolved"), &r.wall)?;
            if w.width.is_none() {
                return Err(MinlpError::Infeasible(format!(
                    "wall {} admits no design at any foundation width up to {} m",
                    r.wall, w.infeasible_below
                ))
                .into());
            }
            Ok(Outcome {
                json: canonical::to_string(&w),
                csv: None,
            })
        }
        Request::PriceWhatIf(r) => {
            let shifted = price_shift(&r.front, &r.material, r.price);
            let thresholds = match r.budget {
                None => Vec::new(),
                Some(b) => r
                    .front
                    .points
                    .iter()
                    .enumerate()
                    .filter_map(|(index, pt)| {
                        price_threshold(&pt.design, b, &r.material)
                            .ok()
                            .map(|price| Threshold {
                                index,
                                design: pt.design.key().to_string(),
                                cost: pt.cost,
                                price,
                            })
                    })
                    .collect(),
            };
            let result = PriceWhatIfResult {
                material: r.material.clone(),
                price: r.price,
                budget: r.budget,
                shifted: FrontDocument::new(shifted.clone()),
                thresholds,
            };
            Ok(Outcome {
                json: canonical::to_string(&result),
                csv: Some(front_csv(&shifted)),
            })
        }
    }
}

/// Worker count: `REBUILD_WORKERS` when set and positive, else the
/// machine's parallelism.
pub fn default_workers() -> usize {
    std::env::var("REBUILD_WORKERS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("solver pool")
}
