//! On-disk layout under a data directory:
//! `scenarios/<fingerprint>.json` and `results/<job>/front.csv|front.json|meta.json`.
//! Files are written once and never replaced.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rebuild_core::canonical;
use rebuild_core::minlp::ScenarioSpec;
use rebuild_core::nlp::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::ops::{Kind, Outcome, Prepared};

/// Provenance written beside every stored front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub kind: Kind,
    pub job: String,
    pub scenario_fingerprint: String,
    pub seed: Option<u64>,
    pub solver: Option<SolverConfig>,
    /// the request as submitted
    pub request: serde_json::Value,
    pub workers: usize,
    pub version: String,
}

impl Meta {
    pub fn new(p: &Prepared, workers: usize) -> Self {
        let solver = p.scenario.as_ref().map(|s| s.solver);
        Meta {
            kind: p.request.kind(),
            job: p.fingerprint.clone(),
            scenario_fingerprint: p.scenario_fingerprint.clone(),
            seed: solver.map(|s| s.seed),
            solver,
            request: serde_json::to_value(&p.request).expect("requests serialize"),
            workers,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

fn write_new(path: &Path, text: &str) -> io::Result<()> {
    match fs::OpenOptions::new().write(true).create_new(true).open(path) {
        Ok(mut f) => f.write_all(text.as_bytes()),
        Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Ok(()),
        Err(e) => Err(e),
    }
}

impl Store {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Store { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn results_dir(&self, job: &str) -> PathBuf {
        self.root.join("results").join(job)
    }

    /// Stores the scenario document under its fingerprint.
    pub fn save_scenario(&self, fingerprint: &str, spec: &ScenarioSpec) -> io::Result<PathBuf> {
        let dir = self.root.join("scenarios");
        fs::create_dir_all(&dir)?;
        let path = dir.join(format!("{fingerprint}.json"));
        write_new(&path, &canonical::to_string(spec))?;
        Ok(path)
    }

    /// Stores a front with its metadata; returns the directory.
    pub fn save_front(&self, outcome: &Outcome, meta: &Meta) -> io::Result<PathBuf> {
        let dir = self.results_dir(&meta.job);
        fs::create_dir_all(&dir)?;
        if let Some(csv) = &outcome.csv {
            write_new(&dir.join("front.csv"), csv)?;
        }
        write_new(&dir.join("front.json"), &outcome.json)?;
        write_new(&dir.join("meta.json"), &canonical::to_string(meta))?;
        Ok(dir)
    }
}
