use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical;
use crate::materials::{filter_available, CatalogError, ComponentClass, MaterialCatalog};
use crate::model::{BuildingParams, DiscreteAssignment, ParamError};
use crate::nlp::SolverConfig;

/// Restriction on the discrete choices of a scenario.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// brick walls on a brick foundation must share the grade
    LinkBrickGrades,
    FixWallMaterial(String),
    FixFoundationMaterial(String),
    FixRoofMaterial(String),
    FixCoverMaterial(String),
}

impl Rule {
    fn fixed(&self) -> Option<(ComponentClass, &str)> {
        match self {
            Rule::LinkBrickGrades => None,
            Rule::FixWallMaterial(n) => Some((ComponentClass::Wall, n)),
            Rule::FixFoundationMaterial(n) => Some((ComponentClass::Foundation, n)),
            Rule::FixRoofMaterial(n) => Some((ComponentClass::Roof, n)),
            Rule::FixCoverMaterial(n) => Some((ComponentClass::RoofCover, n)),
        }
    }

    /// Whether the assignment's material tuple passes this rule.
    pub fn admits(&self, a: &DiscreteAssignment) -> bool {
        match self {
            Rule::LinkBrickGrades => {
                !(a.wall.family() == "Br" && a.foundation.family() == "Br")
                    || a.wall.grade == a.foundation.grade
            }
            Rule::FixWallMaterial(n) => a.wall.name == *n,
            Rule::FixFoundationMaterial(n) => a.foundation.name == *n,
            Rule::FixRoofMaterial(n) => a.roof.name == *n,
            Rule::FixCoverMaterial(n) => a.cover.name == *n,
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("rule {rule:?}: no {class} material named `{name}`")]
    UnknownFixedMaterial {
        rule: Rule,
        class: ComponentClass,
        name: String,
    },
    #[error("invalid solver settings: {0}")]
    Solver(String),
    #[error("scenario document: {0}")]
    Document(String),
    #[error("no discrete assignment satisfies the scenario rules")]
    EmptyEnumeration,
}

/// Scenario document as written by users: which catalog, which materials
/// are unavailable, parameter overrides, discrete rules and solver settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    /// CSV catalog; the built-in case-study catalog when absent
    pub catalog_path: Option<PathBuf>,
    pub exclude_materials: BTreeSet<String>,
    pub param_overrides: BTreeMap<String, f64>,
    pub rules: Vec<Rule>,
    pub solver: SolverConfig,
    /// enumerate every feasible rebar count instead of the minimum
    pub exhaustive_rebar: bool,
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Document(e.to_string()))
    }

    /// Loads the catalog (relative paths resolve against `base`) and
    /// validates everything.
    pub fn resolve(&self, base: Option<&Path>) -> Result<ScenarioConfig, ScenarioError> {
        let catalog = match &self.catalog_path {
            None => MaterialCatalog::case_study(),
            Some(p) => {
                let path = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.clone(),
                };
                MaterialCatalog::from_path(path)?
            }
        };
        self.resolve_with(&catalog)
    }

    /// As [`resolve`](Self::resolve) with an already loaded catalog.
    pub fn resolve_with(&self, catalog: &MaterialCatalog) -> Result<ScenarioConfig, ScenarioError> {
        let catalog = filter_available(catalog, &self.exclude_materials)?;
        let params = BuildingParams::default().with_overrides(&self.param_overrides)?;
        ScenarioConfig::new(catalog, params, self.rules.clone(), self.solver, self.exhaustive_rebar)
    }
}

/// A validated scenario: the filtered catalog, the resolved parameters, the
/// rules and the solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub catalog: MaterialCatalog,
    pub params: BuildingParams,
    pub rules: Vec<Rule>,
    pub solver: SolverConfig,
    pub exhaustive_rebar: bool,
}

impl ScenarioConfig {
    pub fn new(
        catalog: MaterialCatalog,
        params: BuildingParams,
        mut rules: Vec<Rule>,
        solver: SolverConfig,
        exhaustive_rebar: bool,
    ) -> Result<Self, ScenarioError> {
        params.validate()?;
        solver.validate().map_err(ScenarioError::Solver)?;
        for rule in &rules {
            if let Some((class, name)) = rule.fixed() {
                if catalog.get(class, name).is_none() {
                    return Err(ScenarioError::UnknownFixedMaterial {
                        rule: rule.clone(),
                        class,
                        name: name.to_string(),
                    });
                }
            }
        }
        rules.sort();
        rules.dedup();
        let config = ScenarioConfig {
            catalog,
            params,
            rules,
            solver,
            exhaustive_rebar,
        };
        if config.enumerate().is_empty() {
            return Err(ScenarioError::EmptyEnumeration);
        }
        Ok(config)
    }

    /// The case-study scenario with no rules.
    pub fn case_study() -> Self {
        ScenarioSpec::default()
            .resolve(None)
            .expect("built-in scenario is valid")
    }

    pub fn with_rules(self, rules: impl IntoIterator<Item = Rule>) -> Result<Self, ScenarioError> {
        let mut all = self.rules;
        all.extend(rules);
        ScenarioConfig::new(self.catalog, self.params, all, self.solver, self.exhaustive_rebar)
    }

    pub fn without(self, names: &[&str]) -> Result<Self, ScenarioError> {
        let excluded: BTreeSet<String> = names.iter().map(|s| s.to_string()).collect();
        let catalog = filter_available(&self.catalog, &excluded)?;
        ScenarioConfig::new(catalog, self.params, self.rules, self.solver, self.exhaustive_rebar)
    }

    pub fn with_params(self, params: BuildingParams) -> Result<Self, ScenarioError> {
        ScenarioConfig::new(self.catalog, params, self.rules, self.solver, self.exhaustive_rebar)
    }

    pub fn with_solver(self, solver: SolverConfig) -> Result<Self, ScenarioError> {
        ScenarioConfig::new(self.catalog, self.params, self.rules, solver, self.exhaustive_rebar)
    }

    /// Digest of the canonical serialization; equal scenarios share it.
    pub fn fingerprint(&self) -> String {
        canonical::fingerprint(self)
    }

    /// Every discrete assignment the catalog and rules allow.
    pub fn enumerate(&self) -> Vec<DiscreteAssignment> {
        super::enumerate::enumerate_discrete(self)
    }
}
