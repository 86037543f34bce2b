//! Project files in, solution reports out.
//!
//! A project file is a single JSON document (`schema_version` 1). Value
//! types are keyed by positive integers, key `1` being the economic value;
//! keys are mapped to dense type indices in ascending order and requirement
//! ids to dense indices in file order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    PrecedenceConstraint, Requirement, Solution, SolveStatus, SorsModel, StructuralKind, Violation,
};
use crate::vdg::{ExplicitDependency, Quality, ValueDependencyGraph};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueTypeDecl {
    pub key: u32,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequirementRecord {
    pub id: String,
    pub cost: f64,
    pub values: BTreeMap<u32, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DependencyRecord {
    pub type_key: u32,
    pub source_id: String,
    pub target_id: String,
    pub quality: Quality,
    pub strength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructuralRecordKind {
    /// `first_id` precedes `second_id`.
    Precedes,
    Conflicts,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuralRecord {
    pub kind: StructuralRecordKind,
    pub first_id: String,
    pub second_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectFile {
    pub schema_version: u32,
    pub value_types: Vec<ValueTypeDecl>,
    pub requirements: Vec<RequirementRecord>,
    #[serde(default)]
    pub dependencies: Vec<DependencyRecord>,
    #[serde(default)]
    pub structural: Vec<StructuralRecord>,
    pub budget: f64,
    #[serde(default)]
    pub social_bounds: BTreeMap<u32, f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid project at {path}: {message}")]
    Validation { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Validation { path: path.into(), message: message.into() }
}

/// A validated model with the naming information needed to report on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Project {
    pub model: SorsModel,
    /// Declarations sorted by key; position is the type index.
    pub value_types: Vec<ValueTypeDecl>,
    pub warnings: Vec<String>,
}

impl Project {
    pub fn id(&self, i: usize) -> &str {
        &self.model.requirements()[i].id
    }

    pub fn type_index(&self, key: u32) -> Option<usize> {
        self.value_types.iter().position(|t| t.key == key)
    }
}

pub fn load_project(text: &str) -> Result<Project, IoError> {
    let file: ProjectFile = serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => IoError::Schema(e.to_string()),
        _ => IoError::Parse(e.to_string()),
    })?;
    validate(file)
}

pub fn validate(file: ProjectFile) -> Result<Project, IoError> {
    let mut warnings = Vec::new();
    if file.schema_version != SCHEMA_VERSION {
        return Err(invalid(
            "schema_version",
            format!("unsupported version {} (expected {SCHEMA_VERSION})", file.schema_version),
        ));
    }

    let mut value_types = file.value_types.clone();
    value_types.sort_by_key(|t| t.key);
    let mut keys = HashSet::new();
    for (idx, t) in file.value_types.iter().enumerate() {
        if t.key == 0 {
            return Err(invalid(format!("value_types[{idx}].key"), "keys start at 1"));
        }
        if !keys.insert(t.key) {
            return Err(invalid(format!("value_types[{idx}].key"), format!("duplicate key {}", t.key)));
        }
    }
    if !keys.contains(&1) {
        return Err(invalid("value_types", "key 1 (economic value) is required"));
    }
    let type_index: HashMap<u32, usize> = value_types.iter().enumerate().map(|(i, t)| (t.key, i)).collect();
    let kinds = value_types.len();

    let mut index = HashMap::new();
    let mut requirements = Vec::with_capacity(file.requirements.len());
    for (idx, r) in file.requirements.iter().enumerate() {
        let path = format!("requirements[{idx}]");
        if index.insert(r.id.clone(), idx).is_some() {
            return Err(invalid(format!("{path}.id"), format!("duplicate id {:?}", r.id)));
        }
        if !(r.cost.is_finite() && r.cost >= 0.0) {
            return Err(invalid(format!("{path}.cost"), format!("cost {} must be finite and nonnegative", r.cost)));
        }
        let mut values = vec![0.0; kinds];
        for (&key, &v) in &r.values {
            let Some(&k) = type_index.get(&key) else {
                return Err(invalid(format!("{path}.values.{key}"), "undeclared value type"));
            };
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("{path}.values.{key}"), format!("value {v} must be finite and nonnegative")));
            }
            values[k] = v;
        }
        if let Some(t) = value_types.iter().find(|t| !r.values.contains_key(&t.key)) {
            return Err(invalid(format!("{path}.values"), format!("missing value for type {}", t.key)));
        }
        requirements.push(Requirement { id: r.id.clone(), cost: r.cost, values });
    }
    let n = requirements.len();
    let lookup = |path: &str, id: &str| {
        index.get(id).copied().ok_or_else(|| invalid(path, format!("unknown requirement {id:?}")))
    };

    let mut vdgs = vec![ValueDependencyGraph::new(n); kinds];
    for (idx, d) in file.dependencies.iter().enumerate() {
        let path = format!("dependencies[{idx}]");
        let Some(&k) = type_index.get(&d.type_key) else {
            return Err(invalid(format!("{path}.type_key"), format!("undeclared value type {}", d.type_key)));
        };
        let source = lookup(&format!("{path}.source_id"), &d.source_id)?;
        let target = lookup(&format!("{path}.target_id"), &d.target_id)?;
        if !(0.0..=1.0).contains(&d.strength) {
            return Err(invalid(format!("{path}.strength"), format!("strength {} outside [0, 1]", d.strength)));
        }
        if source == target {
            return Err(invalid(path, "a requirement cannot depend on itself"));
        }
        if vdgs[k].edge(source, target).is_some() {
            return Err(invalid(
                path,
                format!("duplicate dependency {} -> {} for type {}", d.source_id, d.target_id, d.type_key),
            ));
        }
        if d.quality == Quality::Unknown && d.strength > 0.0 {
            warnings.push(format!(
                "{path}: dependency {} -> {} of unknown quality with strength {} is ignored",
                d.source_id, d.target_id, d.strength
            ));
        }
        vdgs[k]
            .add_edge(ExplicitDependency { source, target, quality: d.quality, strength: d.strength })
            .map_err(|e| invalid(format!("dependencies[{idx}]"), e.to_string()))?;
    }

    let mut structural = Vec::new();
    let mut seen: HashSet<(StructuralRecordKind, usize, usize)> = HashSet::new();
    let mut precedes_pairs = HashSet::new();
    let mut conflict_pairs = HashSet::new();
    for (idx, s) in file.structural.iter().enumerate() {
        let path = format!("structural[{idx}]");
        let first = lookup(&format!("{path}.first_id"), &s.first_id)?;
        let second = lookup(&format!("{path}.second_id"), &s.second_id)?;
        if first == second {
            return Err(invalid(path, "structural pair needs two distinct requirements"));
        }
        let canonical = match s.kind {
            StructuralRecordKind::Precedes => (s.kind, first, second),
            StructuralRecordKind::Conflicts => (s.kind, first.min(second), first.max(second)),
        };
        if !seen.insert(canonical) {
            warnings.push(format!("{path}: duplicate structural pair {} / {}", s.first_id, s.second_id));
            continue;
        }
        let pair = (first.min(second), first.max(second));
        match s.kind {
            StructuralRecordKind::Precedes => {
                precedes_pairs.insert(pair);
                structural.push(PrecedenceConstraint::precedes(second, first));
            }
            StructuralRecordKind::Conflicts => {
                conflict_pairs.insert(pair);
                structural.push(PrecedenceConstraint::conflicts(first, second));
            }
        }
        if precedes_pairs.contains(&pair) && conflict_pairs.contains(&pair) {
            warnings.push(format!(
                "{path}: {} and {} both precede and conflict; the dependent one can never be selected",
                s.first_id, s.second_id
            ));
        }
    }

    if !(file.budget.is_finite() && file.budget >= 0.0) {
        return Err(invalid("budget", format!("budget {} must be finite and nonnegative", file.budget)));
    }
    let social_keys: Vec<u32> = value_types.iter().skip(1).map(|t| t.key).collect();
    for key in file.social_bounds.keys() {
        if !social_keys.contains(key) {
            return Err(invalid(format!("social_bounds.{key}"), "bounds apply to declared social value types only"));
        }
    }
    let mut social_bounds = Vec::with_capacity(social_keys.len());
    for key in &social_keys {
        match file.social_bounds.get(key) {
            Some(a) if a.is_finite() => social_bounds.push(*a),
            Some(a) => return Err(invalid(format!("social_bounds.{key}"), format!("bound {a} is not finite"))),
            None => return Err(invalid("social_bounds", format!("missing bound for value type {key}"))),
        }
    }

    let model = SorsModel::new(requirements, vdgs, file.budget, social_bounds, structural)
        .map_err(|e| invalid("", e.to_string()))?;
    Ok(Project { model, value_types, warnings })
}

/// Inverse of [`validate`], up to record order and deduplicated entries.
pub fn to_project_file(project: &Project) -> ProjectFile {
    let m = &project.model;
    let keys: Vec<u32> = project.value_types.iter().map(|t| t.key).collect();
    let requirements = m
        .requirements()
        .iter()
        .map(|r| RequirementRecord {
            id: r.id.clone(),
            cost: r.cost,
            values: keys.iter().copied().zip(r.values.iter().copied()).collect(),
        })
        .collect();
    let dependencies = m
        .vdgs()
        .iter()
        .enumerate()
        .flat_map(|(k, g)| {
            let keys = &keys;
            g.edges().map(move |e| DependencyRecord {
                type_key: keys[k],
                source_id: m.requirements()[e.source].id.clone(),
                target_id: m.requirements()[e.target].id.clone(),
                quality: e.quality,
                strength: e.strength,
            })
        })
        .collect();
    let structural = m
        .structural()
        .iter()
        .map(|c| {
            let id = |i: usize| m.requirements()[i].id.clone();
            match c.kind {
                StructuralKind::Precedes => StructuralRecord {
                    kind: StructuralRecordKind::Precedes,
                    first_id: id(c.j),
                    second_id: id(c.i),
                },
                StructuralKind::ConflictsWith => StructuralRecord {
                    kind: StructuralRecordKind::Conflicts,
                    first_id: id(c.i),
                    second_id: id(c.j),
                },
            }
        })
        .collect();
    ProjectFile {
        schema_version: SCHEMA_VERSION,
        value_types: project.value_types.clone(),
        requirements,
        dependencies,
        structural,
        budget: m.budget(),
        social_bounds: keys.iter().skip(1).copied().zip(m.social_bounds().iter().copied()).collect(),
    }
}

pub fn write_project(project: &Project) -> String {
    let mut s = serde_json::to_string_pretty(&to_project_file(project)).expect("project serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeTotal {
    pub key: u32,
    pub name: String,
    pub total: f64,
    /// Lower bound for social types; absent for the economic value.
    pub bound: Option<f64>,
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequirementPenalty {
    pub id: String,
    pub selected: bool,
    /// `θ` per value-type key.
    pub theta: BTreeMap<u32, f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationRecord {
    Budget,
    Social { type_key: u32 },
    Precedes { requirement: String, predecessor: String },
    Conflicts { first: String, second: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub backend: String,
    pub status: SolveStatus,
    pub gap: f64,
}

/// Timing and node counts are deliberately absent so that reports are
/// byte-identical across runs and thread counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub feasible: bool,
    pub objective: f64,
    pub selected: Vec<String>,
    pub rejected: Vec<String>,
    pub totals: Vec<TypeTotal>,
    pub penalties: Vec<RequirementPenalty>,
    pub violations: Vec<ViolationRecord>,
    pub solver: SolverSummary,
    pub warnings: Vec<String>,
}

impl SolutionReport {
    pub fn new(solution: &Solution, project: &Project) -> Self {
        let m = &project.model;
        let id = |i: usize| project.id(i).to_string();
        let totals = project
            .value_types
            .iter()
            .enumerate()
            .map(|(k, t)| {
                let total = solution.per_type_totals[k];
                let bound = (k > 0).then(|| m.social_bounds()[k - 1]);
                TypeTotal { key: t.key, name: t.name.clone(), total, bound, margin: bound.map(|b| total - b) }
            })
            .collect();
        let penalties = (0..m.len())
            .map(|i| RequirementPenalty {
                id: id(i),
                selected: solution.x[i],
                theta: project
                    .value_types
                    .iter()
                    .enumerate()
                    .map(|(k, t)| (t.key, solution.penalties.get(i, k)))
                    .collect(),
            })
            .collect();
        let violations = solution
            .violations
            .iter()
            .map(|v| match *v {
                Violation::Budget => ViolationRecord::Budget,
                Violation::Social(k) => ViolationRecord::Social { type_key: project.value_types[k].key },
                Violation::Precedes(i, j) => ViolationRecord::Precedes { requirement: id(i), predecessor: id(j) },
                Violation::Conflicts(i, j) => ViolationRecord::Conflicts { first: id(i), second: id(j) },
            })
            .collect();
        Self {
            feasible: solution.feasible,
            objective: solution.objective,
            selected: (0..m.len()).filter(|&i| solution.x[i]).map(id).collect(),
            rejected: (0..m.len()).filter(|&i| !solution.x[i]).map(id).collect(),
            totals,
            penalties,
            violations,
            solver: SolverSummary {
                backend: solution.solver_stats.backend.name().to_string(),
                status: solution.solver_stats.status,
                gap: solution.solver_stats.gap,
            },
            warnings: project.warnings.clone(),
        }
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            ReportFormat::Text => self.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        let status = serde_json::to_value(self.solver.status).unwrap();
        let _ = writeln!(out, "status:     {}", status.as_str().unwrap_or_default());
        let _ = writeln!(out, "backend:    {}", self.solver.backend);
        let _ = writeln!(out, "feasible:   {}", self.feasible);
        let _ = writeln!(out, "objective:  {:.6}", self.objective);
        if self.solver.gap > 0.0 {
            let _ = writeln!(out, "gap:        {:.6}", self.solver.gap);
        }
        let _ = writeln!(out, "selected:   {}", self.selected.join(", "));
        let _ = writeln!(out, "rejected:   {}", self.rejected.join(", "));
        out.push('\n');
        let _ = writeln!(out, "{:<6} {:<20} {:>14} {:>14} {:>14}", "type", "name", "total", "bound", "margin");
        for t in &self.totals {
            let opt = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<6} {:<20} {:>14.6} {:>14} {:>14}",
                t.key,
                t.name,
                t.total,
                opt(t.bound),
                opt(t.margin)
            );
        }
        out.push('\n');
        let _ = write!(out, "{:<16} {:<4}", "requirement", "x");
        let keys: Vec<u32> = self.totals.iter().map(|t| t.key).collect();
        for k in &keys {
            let _ = write!(out, " {:>10}", format!("theta[{k}]"));
        }
        out.push('\n');
        for p in &self.penalties {
            let _ = write!(out, "{:<16} {:<4}", p.id, u8::from(p.selected));
            for k in &keys {
                let _ = write!(out, " {:>10.4}", p.theta[k]);
            }
            out.push('\n');
        }
        if !self.violations.is_empty() {
            out.push_str("\nviolations:\n");
            for v in &self.violations {
                let line = match v {
                    ViolationRecord::Budget => "budget exceeded".to_string(),
                    ViolationRecord::Social { type_key } => format!("value type {type_key} below its lower bound"),
                    ViolationRecord::Precedes { requirement, predecessor } => {
                        format!("{requirement} selected without {predecessor}")
                    }
                    ViolationRecord::Conflicts { first, second } => format!("{first} conflicts with {second}"),
                };
                let _ = writeln!(out, "  - {line}");
            }
        }
        if !self.warnings.is_empty() {
            out.push_str("\nwarnings:\n");
            for w in &self.warnings {
                let _ = writeln!(out, "  - {w}");
            }
        }
        out
    }
}

pub fn write_report(solution: &Solution, project: &Project, format: ReportFormat) -> String {
    SolutionReport::new(solution, project).render(format)
}
