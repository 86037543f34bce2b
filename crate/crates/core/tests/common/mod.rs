#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sors::io::{
    DependencyRecord, ProjectFile, RequirementRecord, StructuralRecord, StructuralRecordKind, ValueTypeDecl,
};
use sors::model::{PrecedenceConstraint, Requirement};
use sors::vdg::{ExplicitDependency, Quality};
use sors::{SorsModel, ValueDependencyGraph};

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> ValueDependencyGraph {
    let mut g = ValueDependencyGraph::new(n);
    for source in 0..n {
        for target in 0..n {
            if source != target && rng.gen_bool(density) {
                let quality = Quality::ALL[rng.gen_range(0..3)];
                let strength = rng.gen_range(0.0..=1.0);
                g.add_edge(ExplicitDependency { source, target, quality, strength }).unwrap();
            }
        }
    }
    g
}

/// Acyclic: edges only from lower to higher index.
pub fn random_dag(rng: &mut ChaCha8Rng, n: usize, density: f64) -> ValueDependencyGraph {
    let mut g = ValueDependencyGraph::new(n);
    for source in 0..n {
        for target in source + 1..n {
            if rng.gen_bool(density) {
                let quality = Quality::ALL[rng.gen_range(0..3)];
                let strength = rng.gen_range(0.0..=1.0);
                g.add_edge(ExplicitDependency { source, target, quality, strength }).unwrap();
            }
        }
    }
    g
}

#[derive(Debug, Clone)]
pub struct InstanceShape {
    pub n: usize,
    pub kinds: usize,
    pub density: f64,
    pub structural: usize,
    /// Social bounds drawn as this fraction range of the type's total value.
    pub alpha_range: (f64, f64),
    pub integer_data: bool,
}

pub fn random_instance(rng: &mut ChaCha8Rng, shape: &InstanceShape) -> SorsModel {
    let n = shape.n;
    let requirements: Vec<Requirement> = (0..n)
        .map(|i| {
            let (cost, values) = if shape.integer_data {
                (rng.gen_range(1..=20) as f64, (0..shape.kinds).map(|_| rng.gen_range(0..=30) as f64).collect())
            } else {
                (
                    (rng.gen_range(0.5..20.0f64) * 100.0).round() / 100.0,
                    (0..shape.kinds).map(|_| (rng.gen_range(0.0..30.0f64) * 100.0).round() / 100.0).collect(),
                )
            };
            Requirement { id: format!("r{}", i + 1), cost, values }
        })
        .collect();
    let vdgs = (0..shape.kinds).map(|_| random_graph(rng, n, shape.density)).collect();
    let total_cost: f64 = requirements.iter().map(|r| r.cost).sum();
    let budget = (total_cost * rng.gen_range(0.2..0.8)).round();
    let social_bounds = (1..shape.kinds)
        .map(|k| {
            let sum: f64 = requirements.iter().map(|r| r.values[k]).sum();
            (sum * rng.gen_range(shape.alpha_range.0..shape.alpha_range.1)).round()
        })
        .collect();
    let mut structural = Vec::new();
    if n > 1 {
        for _ in 0..shape.structural {
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            structural.push(if rng.gen_bool(0.5) {
                PrecedenceConstraint::precedes(i, j)
            } else {
                PrecedenceConstraint::conflicts(i, j)
            });
        }
    }
    SorsModel::new(requirements, vdgs, budget, social_bounds, structural).unwrap()
}

/// Project file text for a model, with value-type keys `1..=k_u`.
pub fn project_json(model: &SorsModel) -> String {
    let kinds = model.value_types();
    let ids: Vec<String> = model.requirements().iter().map(|r| r.id.clone()).collect();
    let file = ProjectFile {
        schema_version: 1,
        value_types: (1..=kinds as u32)
            .map(|key| ValueTypeDecl {
                key,
                name: if key == 1 { "economic".into() } else { format!("social{key}") },
            })
            .collect(),
        requirements: model
            .requirements()
            .iter()
            .map(|r| RequirementRecord {
                id: r.id.clone(),
                cost: r.cost,
                values: r.values.iter().enumerate().map(|(k, &v)| (k as u32 + 1, v)).collect(),
            })
            .collect(),
        dependencies: model
            .vdgs()
            .iter()
            .enumerate()
            .flat_map(|(k, g)| {
                let ids = &ids;
                g.edges().map(move |e| DependencyRecord {
                    type_key: k as u32 + 1,
                    source_id: ids[e.source].clone(),
                    target_id: ids[e.target].clone(),
                    quality: e.quality,
                    strength: e.strength,
                })
            })
            .collect(),
        structural: model
            .structural()
            .iter()
            .map(|c| match c.kind {
                sors::model::StructuralKind::Precedes => StructuralRecord {
                    kind: StructuralRecordKind::Precedes,
                    first_id: ids[c.j].clone(),
                    second_id: ids[c.i].clone(),
                },
                sors::model::StructuralKind::ConflictsWith => StructuralRecord {
                    kind: StructuralRecordKind::Conflicts,
                    first_id: ids[c.i].clone(),
                    second_id: ids[c.j].clone(),
                },
            })
            .collect(),
        budget: model.budget(),
        social_bounds: model.social_bounds().iter().enumerate().map(|(k, &a)| (k as u32 + 2, a)).collect(),
    };
    serde_json::to_string_pretty(&file).unwrap()
}

/// Textbook 0/1 knapsack by dynamic programming over integer capacity.
pub fn knapsack_dp(costs: &[usize], values: &[f64], capacity: usize) -> f64 {
    let mut best = vec![0.0f64; capacity + 1];
    for (&c, &v) in costs.iter().zip(values) {
        for cap in (c..=capacity).rev() {
            best[cap] = best[cap].max(best[cap - c] + v);
        }
    }
    best[capacity]
}

/// The three-requirement example, dependencies on value type 2.
pub const THREE_NODE_PROJECT: &str = r#"{
  "schema_version": 1,
  "value_types": [{"key": 1, "name": "economic"}, {"key": 2, "name": "inclusiveness"}],
  "requirements": [
    {"id": "r1", "cost": 1, "values": {"1": 10, "2": 4}},
    {"id": "r2", "cost": 1, "values": {"1": 8, "2": 3}},
    {"id": "r3", "cost": 1, "values": {"1": 6, "2": 5}}
  ],
  "dependencies": [
    {"type_key": 1, "source_id": "r1", "target_id": "r2", "quality": "+", "strength": 0.6},
    {"type_key": 1, "source_id": "r2", "target_id": "r3", "quality": "-", "strength": 0.5},
    {"type_key": 1, "source_id": "r1", "target_id": "r3", "quality": "+", "strength": 0.2},
    {"type_key": 2, "source_id": "r1", "target_id": "r2", "quality": "+", "strength": 0.6},
    {"type_key": 2, "source_id": "r2", "target_id": "r3", "quality": "-", "strength": 0.5},
    {"type_key": 2, "source_id": "r1", "target_id": "r3", "quality": "+", "strength": 0.2}
  ],
  "structural": [],
  "budget": 2,
  "social_bounds": {"2": 3}
}
"#;
