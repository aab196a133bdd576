//! Building-material catalog: loading, validation, availability filtering and
//! the masonry composite-property formulas.
//!
//! A catalog is a comma-separated document with the header
//!
//! ```text
//! name,grade,class,density_kg_m3,cost_usd_m3,ee_MJ_kg,sigma_allw_MPa,min_thickness_m
//! ```
//!
//! `class` is one of `wall`, `foundation`, `roof`, `roof_cover`, or several of
//! them joined with `+` (e.g. `wall+foundation`) when one record serves more
//! than one component. Strengths are given in MPa in the document and stored
//! in Pa.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The catalog shipped with the crate (twelve rows, eight of them shared by
/// walls and foundations).
pub const CASE_STUDY_CATALOG: &str = include_str!("../data/case_study_catalog.csv");

pub const CATALOG_HEADER: [&str; 8] = [
    "name",
    "grade",
    "class",
    "density_kg_m3",
    "cost_usd_m3",
    "ee_MJ_kg",
    "sigma_allw_MPa",
    "min_thickness_m",
];

const MPA: f64 = 1.0e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("catalog parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: missing field `{field}`")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: invalid `{field}`: {reason}")]
    InvalidValue {
        line: usize,
        field: &'static str,
        reason: String,
    },
    #[error("empty class set: {0}")]
    EmptyClass(ComponentClass),
    #[error("duplicate material `{name}` in class {class}")]
    DuplicateName { class: ComponentClass, name: String },
    #[error("unknown material `{0}`")]
    UnknownMaterial(String),
    #[error("{0} must be positive, got {1}")]
    NonPositiveInput(&'static str, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Grade {
    G1,
    G2,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl Grade {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "G1" => Some(Grade::G1),
            "G2" => Some(Grade::G2),
            "n/a" | "" | "-" => Some(Grade::NotApplicable),
            _ => None,
        }
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Grade::G1 => "G1",
            Grade::G2 => "G2",
            Grade::NotApplicable => "n/a",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentClass {
    Wall,
    Foundation,
    Roof,
    RoofCover,
}

impl ComponentClass {
    pub const ALL: [ComponentClass; 4] = [
        ComponentClass::Wall,
        ComponentClass::Foundation,
        ComponentClass::Roof,
        ComponentClass::RoofCover,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ComponentClass::Wall => "wall",
            ComponentClass::Foundation => "foundation",
            ComponentClass::Roof => "roof",
            ComponentClass::RoofCover => "roof_cover",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "wall" => Some(ComponentClass::Wall),
            "foundation" => Some(ComponentClass::Foundation),
            "roof" => Some(ComponentClass::Roof),
            "roof_cover" | "cover" => Some(ComponentClass::RoofCover),
            _ => None,
        }
    }

    /// Masonry classes carry a compressive strength and a minimum thickness.
    pub fn is_masonry(self) -> bool {
        matches!(self, ComponentClass::Wall | ComponentClass::Foundation)
    }
}

impl fmt::Display for ComponentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One material as used for one building component. SI units throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub name: String,
    pub grade: Grade,
    pub class: ComponentClass,
    /// kg/m³
    pub density: f64,
    /// USD/m³
    pub unit_cost: f64,
    /// MJ/kg
    pub embodied_energy: f64,
    /// Pa
    pub allowable_compressive_strength: Option<f64>,
    /// m
    pub min_thickness: Option<f64>,
}

impl MaterialSpec {
    /// Embodied energy per cubic metre (MJ/m³).
    pub fn embodied_energy_per_m3(&self) -> f64 {
        self.embodied_energy * self.density
    }

    /// Material family: the name without its trailing grade digits
    /// (`Br2` -> `Br`).
    pub fn family(&self) -> &str {
        self.name.trim_end_matches(|c: char| c.is_ascii_digit())
    }

    pub fn strength(&self) -> f64 {
        self.allowable_compressive_strength.unwrap_or(f64::INFINITY)
    }

    pub fn min_thickness_or_zero(&self) -> f64 {
        self.min_thickness.unwrap_or(0.0)
    }

    fn validate(&self, line: usize) -> Result<(), CatalogError> {
        let bad = |field: &'static str, reason: String| CatalogError::InvalidValue {
            line,
            field,
            reason,
        };
        if self.name.trim().is_empty() {
            return Err(CatalogError::MissingField { line, field: "name" });
        }
        if !(self.density.is_finite() && self.density > 0.0) {
            return Err(bad("density_kg_m3", format!("must be positive, got {}", self.density)));
        }
        if !(self.unit_cost.is_finite() && self.unit_cost >= 0.0) {
            return Err(bad("cost_usd_m3", format!("must be non-negative, got {}", self.unit_cost)));
        }
        if !(self.embodied_energy.is_finite() && self.embodied_energy >= 0.0) {
            return Err(bad(
                "ee_MJ_kg",
                format!("must be non-negative, got {}", self.embodied_energy),
            ));
        }
        match (self.class.is_masonry(), self.allowable_compressive_strength) {
            (true, None) => {
                return Err(CatalogError::MissingField {
                    line,
                    field: "sigma_allw_MPa",
                })
            }
            (true, Some(s)) if !(s.is_finite() && s > 0.0) => {
                return Err(bad("sigma_allw_MPa", format!("must be positive, got {}", s / MPA)))
            }
            (false, Some(_)) => {
                return Err(bad(
                    "sigma_allw_MPa",
                    format!("not allowed for class {}", self.class),
                ))
            }
            _ => {}
        }
        match (self.class.is_masonry(), self.min_thickness) {
            (true, None) => {
                return Err(CatalogError::MissingField {
                    line,
                    field: "min_thickness_m",
                })
            }
            (true, Some(t)) if !(t.is_finite() && t > 0.0) => {
                return Err(bad("min_thickness_m", format!("must be positive, got {t}")))
            }
            (false, Some(_)) => {
                return Err(bad(
                    "min_thickness_m",
                    format!("not allowed for class {}", self.class),
                ))
            }
            _ => {}
        }
        Ok(())
    }
}

/// One material as listed in a catalog document, possibly serving
/// several component classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogRow {
    pub name: String,
    pub grade: Grade,
    pub classes: Vec<ComponentClass>,
    pub density: f64,
    pub unit_cost: f64,
    pub embodied_energy: f64,
    pub allowable_compressive_strength: Option<f64>,
    pub min_thickness: Option<f64>,
}

impl CatalogRow {
    fn matches(&self, e: &MaterialSpec) -> bool {
        self.name == e.name
            && self.grade == e.grade
            && self.density == e.density
            && self.unit_cost == e.unit_cost
            && self.embodied_energy == e.embodied_energy
            && self.allowable_compressive_strength == e.allowable_compressive_strength
            && self.min_thickness == e.min_thickness
    }
}

/// Validated, immutable set of materials. Every component class is non-empty
/// and names are unique within a class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialCatalog {
    entries: Vec<MaterialSpec>,
}

impl MaterialCatalog {
    pub fn new(entries: Vec<MaterialSpec>) -> Result<Self, CatalogError> {
        for (i, e) in entries.iter().enumerate() {
            e.validate(i + 1)?;
        }
        let catalog = MaterialCatalog { entries };
        catalog.check_sets()?;
        Ok(catalog)
    }

    /// The built-in case-study catalog.
    pub fn case_study() -> Self {
        load_catalog(CASE_STUDY_CATALOG.as_bytes()).expect("built-in catalog is valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let file = std::fs::File::open(path.as_ref()).map_err(|e| CatalogError::Parse {
            line: 0,
            message: format!("{}: {e}", path.as_ref().display()),
        })?;
        load_catalog(file)
    }

    fn check_sets(&self) -> Result<(), CatalogError> {
        for class in ComponentClass::ALL {
            let mut seen = BTreeSet::new();
            for e in self.class(class) {
                if !seen.insert(e.name.as_str()) {
                    return Err(CatalogError::DuplicateName {
                        class,
                        name: e.name.clone(),
                    });
                }
            }
            if seen.is_empty() {
                return Err(CatalogError::EmptyClass(class));
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> &[MaterialSpec] {
        &self.entries
    }

    pub fn class(&self, class: ComponentClass) -> impl Iterator<Item = &MaterialSpec> {
        self.entries.iter().filter(move |e| e.class == class)
    }

    pub fn walls(&self) -> impl Iterator<Item = &MaterialSpec> {
        self.class(ComponentClass::Wall)
    }

    pub fn foundations(&self) -> impl Iterator<Item = &MaterialSpec> {
        self.class(ComponentClass::Foundation)
    }

    pub fn roofs(&self) -> impl Iterator<Item = &MaterialSpec> {
        self.class(ComponentClass::Roof)
    }

    pub fn covers(&self) -> impl Iterator<Item = &MaterialSpec> {
        self.class(ComponentClass::RoofCover)
    }

    pub fn class_len(&self, class: ComponentClass) -> usize {
        self.class(class).count()
    }

    pub fn get(&self, class: ComponentClass, name: &str) -> Option<&MaterialSpec> {
        self.class(class).find(|e| e.name == name)
    }

    pub fn contains_name(&self, name: &str) -> bool {
        self.entries.iter().any(|e| e.name == name)
    }

    /// Catalog with a changed unit price for every entry called `name`.
    pub fn with_price(&self, name: &str, unit_cost: f64) -> Result<Self, CatalogError> {
        if !self.contains_name(name) {
            return Err(CatalogError::UnknownMaterial(name.to_string()));
        }
        let entries = self
            .entries
            .iter()
            .cloned()
            .map(|mut e| {
                if e.name == name {
                    e.unit_cost = unit_cost;
                }
                e
            })
            .collect();
        MaterialCatalog::new(entries)
    }

    /// Entries regrouped into document rows: entries sharing a name and
    /// every property except the class form one row.
    pub fn rows(&self) -> Vec<CatalogRow> {
        let mut rows: Vec<CatalogRow> = Vec::new();
        for e in &self.entries {
            match rows.iter_mut().find(|r| r.matches(e)) {
                Some(r) => r.classes.push(e.class),
                None => rows.push(CatalogRow {
                    name: e.name.clone(),
                    grade: e.grade,
                    classes: vec![e.class],
                    density: e.density,
                    unit_cost: e.unit_cost,
                    embodied_energy: e.embodied_energy,
                    allowable_compressive_strength: e.allowable_compressive_strength,
                    min_thickness: e.min_thickness,
                }),
            }
        }
        rows
    }

    /// Serializes back to the tabular document format, one row per entry.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(CATALOG_HEADER).expect("in-memory write");
        for e in &self.entries {
            w.write_record([
                e.name.clone(),
                e.grade.to_string(),
                e.class.to_string(),
                format!("{}", e.density),
                format!("{}", e.unit_cost),
                format!("{}", e.embodied_energy),
                e.allowable_compressive_strength
                    .map(|s| format!("{}", s / MPA))
                    .unwrap_or_default(),
                e.min_thickness.map(|t| format!("{t}")).unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 output")
    }
}

fn parse_number(
    raw: Option<&str>,
    line: usize,
    field: &'static str,
) -> Result<Option<f64>, CatalogError> {
    match raw.map(str::trim) {
        None | Some("") | Some("-") => Ok(None),
        Some(s) => s.parse::<f64>().map(Some).map_err(|_| CatalogError::InvalidValue {
            line,
            field,
            reason: format!("`{s}` is not a number"),
        }),
    }
}

/// Parses and validates a catalog document.
pub fn load_catalog<R: Read>(source: R) -> Result<MaterialCatalog, CatalogError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(source);
    let headers = reader.headers().map_err(|e| CatalogError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.is_empty() || (headers.len() == 1 && headers.get(0) == Some("")) {
        return Err(CatalogError::EmptyClass(ComponentClass::Wall));
    }
    let header: Vec<&str> = headers.iter().collect();
    if header != CATALOG_HEADER {
        return Err(CatalogError::Parse {
            line: 1,
            message: format!("expected header `{}`", CATALOG_HEADER.join(",")),
        });
    }

    let mut entries = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| CatalogError::Parse {
            line,
            message: e.to_string(),
        })?;
        let field = |idx: usize| record.get(idx).map(str::trim);
        let name = match field(0) {
            Some(n) if !n.is_empty() => n.to_string(),
            _ => return Err(CatalogError::MissingField { line, field: "name" }),
        };
        let grade = Grade::parse(field(1).unwrap_or("")).ok_or_else(|| {
            CatalogError::InvalidValue {
                line,
                field: "grade",
                reason: format!("unknown grade `{}`", field(1).unwrap_or("")),
            }
        })?;
        let classes_raw = field(2).unwrap_or("");
        if classes_raw.is_empty() {
            return Err(CatalogError::MissingField { line, field: "class" });
        }
        let mut classes = Vec::new();
        for part in classes_raw.split('+') {
            let class = ComponentClass::parse(part.trim()).ok_or_else(|| {
                CatalogError::InvalidValue {
                    line,
                    field: "class",
                    reason: format!("unknown class `{part}`"),
                }
            })?;
            classes.push(class);
        }
        let required = |idx: usize, name: &'static str| -> Result<f64, CatalogError> {
            parse_number(field(idx), line, name)?
                .ok_or(CatalogError::MissingField { line, field: name })
        };
        let density = required(3, "density_kg_m3")?;
        let unit_cost = required(4, "cost_usd_m3")?;
        let embodied_energy = required(5, "ee_MJ_kg")?;
        let strength = parse_number(field(6), line, "sigma_allw_MPa")?;
        let min_thickness = parse_number(field(7), line, "min_thickness_m")?;

        for class in classes {
            let spec = MaterialSpec {
                name: name.clone(),
                grade,
                class,
                density,
                unit_cost,
                embodied_energy,
                allowable_compressive_strength: if class.is_masonry() {
                    strength.map(|s| s * MPA)
                } else {
                    strength
                },
                min_thickness,
            };
            spec.validate(line)?;
            entries.push(spec);
        }
    }
    if entries.is_empty() {
        return Err(CatalogError::EmptyClass(ComponentClass::Wall));
    }
    let catalog = MaterialCatalog { entries };
    catalog.check_sets()?;
    Ok(catalog)
}

/// Removes every entry whose name is in `excluded`. Unknown names are errors.
pub fn filter_available(
    catalog: &MaterialCatalog,
    excluded: &BTreeSet<String>,
) -> Result<MaterialCatalog, CatalogError> {
    if let Some(unknown) = excluded.iter().find(|n| !catalog.contains_name(n)) {
        return Err(CatalogError::UnknownMaterial(unknown.clone()));
    }
    let entries: Vec<MaterialSpec> = catalog
        .entries
        .iter()
        .filter(|e| !excluded.contains(&e.name))
        .cloned()
        .collect();
    let filtered = MaterialCatalog { entries };
    filtered.check_sets()?;
    Ok(filtered)
}

/// Masonry density from unit and mortar densities (kg/m³): 7/8 unit, 1/8 mortar.
pub fn masonry_density(rho_unit: f64, rho_mortar: f64) -> Result<f64, CatalogError> {
    if rho_unit.is_nan() || rho_unit <= 0.0 {
        return Err(CatalogError::NonPositiveInput("rho_unit", rho_unit));
    }
    if rho_mortar.is_nan() || rho_mortar <= 0.0 {
        return Err(CatalogError::NonPositiveInput("rho_mortar", rho_mortar));
    }
    Ok(0.875 * rho_unit + 0.125 * rho_mortar)
}

/// Masonry compressive strength (MPa) from unit strength `f_b` and mortar
/// strength `f_m`, both in MPa.
pub fn masonry_compressive_strength(f_b: f64, f_m: f64) -> Result<f64, CatalogError> {
    if f_b.is_nan() || f_b <= 0.0 {
        return Err(CatalogError::NonPositiveInput("f_b", f_b));
    }
    if f_m.is_nan() || f_m <= 0.0 {
        return Err(CatalogError::NonPositiveInput("f_m", f_m));
    }
    Ok(0.75 * f_b.powf(0.75) * f_m.powf(0.31))
}
