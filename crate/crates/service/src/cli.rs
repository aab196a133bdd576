//! Command-line front end. Every subcommand builds the same [`Request`] the
//! HTTP API would and runs it through [`ops::execute`].

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rebuild_core::minlp::{FoundationWidth, Goal, ScenarioSpec};
use rebuild_core::pareto::{FrontDocument, ParetoFront, Progress};

use crate::ops::{
    self, AreaSweepRequest, Engines, Kind, MinBfoRequest, OpError, Outcome, ParetoRequest,
    PriceWhatIfRequest, Request, SolveRequest,
};
use crate::store::{Meta, Store};

#[derive(Debug, Parser)]
#[command(name = "rebuild", version, about = "Cost and embodied-energy design optimizer")]
pub struct Cli {
    /// directory holding `scenarios/` and `results/`
    #[arg(long, global = true, default_value = ".")]
    pub data_dir: PathBuf,
    /// solver threads; defaults to REBUILD_WORKERS, then the core count
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// overrides the scenario's solver seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GoalArg {
    MinEnergy,
    MinCost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrontFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WidthFormat {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One mixed-integer solve
    Solve {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long, value_enum, default_value = "min-energy")]
        goal: GoalArg,
        #[arg(long)]
        energy_cap: Option<f64>,
        #[arg(long)]
        min_floor_area: Option<f64>,
    },
    /// Cost versus embodied-energy front over a budget range
    Pareto {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 4500.0)]
        budget_min: f64,
        #[arg(long, default_value_t = 9000.0)]
        budget_max: f64,
        #[arg(long, default_value_t = 150)]
        steps: usize,
        #[arg(long, default_value_t = 4)]
        refine_depth: u32,
        #[arg(long, value_enum, default_value = "csv")]
        format: FrontFormat,
    },
    /// Floor area versus embodied-energy front at a fixed budget
    AreaSweep {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        budget: f64,
        #[arg(long)]
        area_min: f64,
        #[arg(long)]
        area_max: f64,
        #[arg(long, default_value_t = 41)]
        steps: usize,
        #[arg(long, default_value_t = 4)]
        refine_depth: u32,
        #[arg(long, value_enum, default_value = "csv")]
        format: FrontFormat,
    },
    /// Smallest foundation width admitting a wall material
    MinBfo {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        wall: String,
        #[arg(long, value_enum, default_value = "text")]
        format: WidthFormat,
    },
    /// Reprice one material on a saved front
    PriceWhatIf {
        /// front.json written by `pareto`
        #[arg(long)]
        front: PathBuf,
        #[arg(long)]
        material: String,
        #[arg(long)]
        price: f64,
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: FrontFormat,
    },
    /// Run the HTTP API
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: std::net::IpAddr,
    },
}

fn io(path: &Path, e: std::io::Error) -> OpError {
    OpError::Io(format!("{}: {e}", path.display()))
}

fn load_scenario(path: Option<&Path>, seed: Option<u64>) -> Result<ScenarioSpec, OpError> {
    let mut spec = match path {
        None => ScenarioSpec::default(),
        Some(p) => ScenarioSpec::from_json(&fs::read_to_string(p).map_err(|e| io(p, e))?)?,
    };
    if let Some(s) = seed {
        spec.solver.seed = s;
    }
    Ok(spec)
}

fn load_front(path: &Path) -> Result<ParetoFront, OpError> {
    let text = fs::read_to_string(path).map_err(|e| io(path, e))?;
    serde_json::from_str::<FrontDocument>(&text)
        .map(|d| d.front)
        .or_else(|_| serde_json::from_str::<ParetoFront>(&text))
        .map_err(|e| OpError::Invalid(format!("{}: not a front document: {e}", path.display())))
}

/// The request a subcommand stands for; `None` for `serve`.
pub fn request(cli: &Cli) -> Result<Option<Request>, OpError> {
    let scenario = |p: &Option<PathBuf>| load_scenario(p.as_deref(), cli.seed);
    let r = match &cli.command {
        Command::Solve {
            scenario: s,
            budget,
            goal,
            energy_cap,
            min_floor_area,
        } => Request::Solve(SolveRequest {
            scenario: scenario(s)?,
            goal: match goal {
                GoalArg::MinEnergy => Goal::MinEnergy,
                GoalArg::MinCost => Goal::MinCost,
            },
            budget: *budget,
            energy_cap: *energy_cap,
            min_floor_area: *min_floor_area,
        }),
        Command::Pareto {
            scenario: s,
            budget_min,
            budget_max,
            steps,
            refine_depth,
            ..
        } => Request::Pareto(ParetoRequest {
            scenario: scenario(s)?,
            budget_min: *budget_min,
            budget_max: *budget_max,
            steps: *steps,
            refine_depth: *refine_depth,
        }),
        Command::AreaSweep {
            scenario: s,
            budget,
            area_min,
            area_max,
            steps,
            refine_depth,
            ..
        } => Request::AreaSweep(AreaSweepRequest {
            scenario: scenario(s)?,
            budget: *budget,
            area_min: *area_min,
            area_max: *area_max,
            steps: *steps,
            refine_depth: *refine_depth,
        }),
        Command::MinBfo { scenario: s, wall, .. } => Request::MinBfo(MinBfoRequest {
            scenario: scenario(s)?,
            wall: wall.clone(),
        }),
        Command::PriceWhatIf {
            front,
            material,
            price,
            budget,
            ..
        } => Request::PriceWhatIf(PriceWhatIfRequest {
            front: load_front(front)?,
            material: material.clone(),
            price: *price,
            budget: *budget,
        }),
        Command::Serve { .. } => return Ok(None),
    };
    Ok(Some(r))
}

fn scenario_dir(cli: &Cli) -> Option<&Path> {
    let s = match &cli.command {
        Command::Solve { scenario, .. }
        | Command::Pareto { scenario, .. }
        | Command::AreaSweep { scenario, .. }
        | Command::MinBfo { scenario, .. } => scenario.as_deref(),
        _ => None,
    };
    s.and_then(Path::parent)
}

pub fn workers(cli: &Cli) -> usize {
    cli.workers.filter(|&n| n > 0).unwrap_or_else(ops::default_workers)
}

/// Runs a non-serve subcommand. Returns the text for stdout and the
/// outcome; fronts are also stored under the data directory.
pub fn execute(cli: &Cli) -> Result<(String, Outcome), OpError> {
    let request = request(cli)?.ok_or_else(|| OpError::Invalid("serve has no result".into()))?;
    let prepared = ops::prepare(request, scenario_dir(cli))?;
    let workers = workers(cli);
    let outcome = ops::pool(workers)
        .install(|| ops::execute(&prepared, &Engines::default(), &Progress::new()))?;
    if matches!(prepared.request.kind(), Kind::Pareto | Kind::AreaSweep) {
        Store::new(&cli.data_dir)
            .save_front(&outcome, &Meta::new(&prepared, workers))
            .map_err(|e| OpError::Io(e.to_string()))?;
    }
    let text = match &cli.command {
        Command::Pareto { format, .. }
        | Command::AreaSweep { format, .. }
        | Command::PriceWhatIf { format, .. } => match format {
            FrontFormat::Csv => outcome.csv.clone().unwrap_or_default(),
            FrontFormat::Json => format!("{}\n", outcome.json),
        },
        Command::MinBfo {
            format: WidthFormat::Text,
            ..
        } => {
            let w: FoundationWidth =
                serde_json::from_str(&outcome.json).expect("foundation width round trip");
            format!("{:.2}\n", w.width.expect("feasible widths are set"))
        }
        _ => format!("{}\n", outcome.json),
    };
    Ok((text, outcome))
}
