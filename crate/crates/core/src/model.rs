//! The selection model: requirements, per-type dependency graphs, budget,
//! social lower bounds and structural couplings, plus evaluation of any
//! candidate selection vector against it.
//!
//! Value type `0` is the economic value; types `1..` are social values, each
//! with its own lower bound. For a selection `x`, the penalty of requirement
//! `i` on type `k` is the strongest influence it loses, either a positive
//! influencer left out or a negative influencer taken in:
//!
//! ```text
//! θ[i][k] = max_{j ≠ i} (|I[i][j]| + (1 − 2 x_j) I[i][j]) / 2
//! ```
//!
//! and its contribution to type `k` is `x_i v[i][k] − y[i][k] v[i][k]` with
//! `y[i][k] = x_i θ[i][k]`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vdg::{influence_matrix, GraphError, InfluenceMatrix, ValueDependencyGraph};

pub mod dars;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Requirement {
    pub id: String,
    pub cost: f64,
    /// One value per type; index 0 is economic.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StructuralKind {
    /// `r_j` precedes `r_i`: `x_i ≤ x_j`.
    Precedes,
    /// `r_i` conflicts with `r_j`: `x_i + x_j ≤ 1`.
    ConflictsWith,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrecedenceConstraint {
    pub kind: StructuralKind,
    pub i: usize,
    pub j: usize,
}

impl PrecedenceConstraint {
    /// `r_j` precedes `r_i`.
    pub fn precedes(i: usize, j: usize) -> Self {
        Self { kind: StructuralKind::Precedes, i, j }
    }

    pub fn conflicts(i: usize, j: usize) -> Self {
        Self { kind: StructuralKind::ConflictsWith, i, j }
    }

    pub fn is_satisfied(&self, x: &[bool]) -> bool {
        match self.kind {
            StructuralKind::Precedes => !x[self.i] || x[self.j],
            StructuralKind::ConflictsWith => !(x[self.i] && x[self.j]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("model has no value types")]
    NoValueTypes,
    #[error("requirement {index} has {found} values, expected {expected}")]
    ValueCount { index: usize, found: usize, expected: usize },
    #[error("requirement {index} has invalid cost {cost}")]
    InvalidCost { index: usize, cost: f64 },
    #[error("requirement {index} has invalid value {value} for type {kind}")]
    InvalidValue { index: usize, kind: usize, value: f64 },
    #[error("expected {expected} dependency graphs, found {found}")]
    GraphCount { expected: usize, found: usize },
    #[error("dependency graph for type {kind} has {found} nodes, expected {expected}")]
    GraphSize { kind: usize, found: usize, expected: usize },
    #[error("expected {expected} social bounds, found {found}")]
    BoundCount { expected: usize, found: usize },
    #[error("social bound for type {kind} is not a finite number")]
    InvalidBound { kind: usize },
    #[error("budget {0} must be a finite nonnegative number")]
    InvalidBudget(f64),
    #[error("structural constraint {0:?} references a missing requirement or itself")]
    InvalidStructural(PrecedenceConstraint),
    #[error("selection vector has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SorsModel {
    requirements: Vec<Requirement>,
    vdgs: Vec<ValueDependencyGraph>,
    budget: f64,
    social_bounds: Vec<f64>,
    structural: Vec<PrecedenceConstraint>,
}

impl SorsModel {
    /// Validates and assembles a model. Conflict pairs listed in both orders
    /// are kept once.
    pub fn new(
        requirements: Vec<Requirement>,
        vdgs: Vec<ValueDependencyGraph>,
        budget: f64,
        social_bounds: Vec<f64>,
        structural: Vec<PrecedenceConstraint>,
    ) -> Result<Self, ModelError> {
        let n = requirements.len();
        let kinds = vdgs.len();
        if kinds == 0 {
            return Err(ModelError::NoValueTypes);
        }
        for (index, r) in requirements.iter().enumerate() {
            if r.values.len() != kinds {
                return Err(ModelError::ValueCount { index, found: r.values.len(), expected: kinds });
            }
            if !(r.cost.is_finite() && r.cost >= 0.0) {
                return Err(ModelError::InvalidCost { index, cost: r.cost });
            }
            if let Some((kind, &value)) =
                r.values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0))
            {
                return Err(ModelError::InvalidValue { index, kind, value });
            }
        }
        for (kind, g) in vdgs.iter().enumerate() {
            if g.node_count() != n {
                return Err(ModelError::GraphSize { kind, found: g.node_count(), expected: n });
            }
        }
        if social_bounds.len() != kinds - 1 {
            return Err(ModelError::BoundCount { expected: kinds - 1, found: social_bounds.len() });
        }
        if let Some(k) = social_bounds.iter().position(|a| !a.is_finite()) {
            return Err(ModelError::InvalidBound { kind: k + 1 });
        }
        if !(budget.is_finite() && budget >= 0.0) {
            return Err(ModelError::InvalidBudget(budget));
        }

        let mut kept: Vec<PrecedenceConstraint> = Vec::with_capacity(structural.len());
        for c in structural {
            if c.i >= n || c.j >= n || c.i == c.j {
                return Err(ModelError::InvalidStructural(c));
            }
            let duplicate = kept.iter().any(|o| {
                o.kind == c.kind
                    && ((o.i, o.j) == (c.i, c.j)
                        || (c.kind == StructuralKind::ConflictsWith && (o.i, o.j) == (c.j, c.i)))
            });
            if !duplicate {
                kept.push(c);
            }
        }

        Ok(Self { requirements, vdgs, budget, social_bounds, structural: kept })
    }

    pub fn len(&self) -> usize {
        self.requirements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requirements.is_empty()
    }

    /// Number of value types, economic included.
    pub fn value_types(&self) -> usize {
        self.vdgs.len()
    }

    pub fn requirements(&self) -> &[Requirement] {
        &self.requirements
    }

    pub fn vdgs(&self) -> &[ValueDependencyGraph] {
        &self.vdgs
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Lower bound for type `k ≥ 1`, stored at `k − 1`.
    pub fn social_bounds(&self) -> &[f64] {
        &self.social_bounds
    }

    pub fn structural(&self) -> &[PrecedenceConstraint] {
        &self.structural
    }

    pub fn cost(&self, i: usize) -> f64 {
        self.requirements[i].cost
    }

    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.requirements[i].values[k]
    }

    /// One influence matrix per value type.
    pub fn influences(&self) -> Vec<InfluenceMatrix> {
        self.vdgs.iter().map(influence_matrix).collect()
    }

    fn check_dims(&self, influences: &[InfluenceMatrix], x: &[bool]) -> Result<(), ModelError> {
        if x.len() != self.len() {
            return Err(ModelError::DimensionMismatch { expected: self.len(), found: x.len() });
        }
        if influences.len() != self.value_types() {
            return Err(ModelError::GraphCount { expected: self.value_types(), found: influences.len() });
        }
        if let Some((kind, m)) = influences.iter().enumerate().find(|(_, m)| m.size() != self.len()) {
            return Err(ModelError::GraphSize { kind, found: m.size(), expected: self.len() });
        }
        Ok(())
    }
}

/// `θ[i][k]`, one row per requirement.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyMatrix {
    rows: Vec<Vec<f64>>,
}

impl PenaltyMatrix {
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.rows[i][k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Penalty contributed by influencer `j` on a requirement, given whether `j`
/// is selected.
#[inline]
pub fn penalty_term(influence: f64, selected: bool) -> f64 {
    let sign = if selected { -1.0 } else { 1.0 };
    (influence.abs() + sign * influence) / 2.0
}

pub(crate) fn penalty_row(infl: &InfluenceMatrix, i: usize, x: &[bool]) -> f64 {
    infl.row(i)
        .iter()
        .zip(x)
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, (&v, &xj))| penalty_term(v, xj))
        .fold(0.0, f64::max)
}

pub fn penalties(
    model: &SorsModel,
    influences: &[InfluenceMatrix],
    x: &[bool],
) -> Result<PenaltyMatrix, ModelError> {
    model.check_dims(influences, x)?;
    let rows = (0..model.len())
        .map(|i| influences.iter().map(|m| penalty_row(m, i, x)).collect())
        .collect();
    Ok(PenaltyMatrix { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Violation {
    Budget,
    /// Social value type `k ≥ 1` below its bound.
    Social(usize),
    /// `x_i ≤ x_j` broken.
    Precedes(usize, usize),
    Conflicts(usize, usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Budget => write!(f, "budget exceeded"),
            Violation::Social(k) => write!(f, "social value type {k} below its lower bound"),
            Violation::Precedes(i, j) => write!(f, "requirement {i} selected without its predecessor {j}"),
            Violation::Conflicts(i, j) => write!(f, "conflicting requirements {i} and {j} both selected"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Exhaustive,
    BranchAndBound,
    /// Plain evaluation of a given vector.
    Evaluation,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Exhaustive => "exhaustive",
            Backend::BranchAndBound => "bnb",
            Backend::Evaluation => "evaluation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// A node or time limit fired; the result is the best found so far.
    LimitReached,
    Evaluated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverStats {
    pub backend: Backend,
    pub status: SolveStatus,
    pub nodes_explored: u64,
    pub wall_time: std::time::Duration,
    /// Upper bound minus objective when a limit fired, else zero.
    pub gap: f64,
}

impl SolverStats {
    pub fn evaluation() -> Self {
        Self {
            backend: Backend::Evaluation,
            status: SolveStatus::Evaluated,
            nodes_explored: 0,
            wall_time: std::time::Duration::ZERO,
            gap: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<bool>,
    /// Penalized economic value; equals `per_type_totals[0]`.
    pub objective: f64,
    pub per_type_totals: Vec<f64>,
    pub penalties: PenaltyMatrix,
    pub violations: Vec<Violation>,
    pub feasible: bool,
    pub solver_stats: SolverStats,
}

impl Solution {
    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.x.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }
}

fn violations_given_totals(model: &SorsModel, totals: &[f64], x: &[bool]) -> Vec<Violation> {
    let mut out = Vec::new();
    let spent: f64 = x.iter().zip(&model.requirements).filter(|(&s, _)| s).map(|(_, r)| r.cost).sum();
    if spent > model.budget {
        out.push(Violation::Budget);
    }
    for (k, &alpha) in model.social_bounds.iter().enumerate() {
        if totals[k + 1] < alpha {
            out.push(Violation::Social(k + 1));
        }
    }
    for c in &model.structural {
        if !c.is_satisfied(x) {
            out.push(match c.kind {
                StructuralKind::Precedes => Violation::Precedes(c.i, c.j),
                StructuralKind::ConflictsWith => Violation::Conflicts(c.i, c.j),
            });
        }
    }
    out
}

fn type_totals(model: &SorsModel, theta: &PenaltyMatrix, x: &[bool]) -> Vec<f64> {
    (0..model.value_types())
        .map(|k| {
            x.iter()
                .enumerate()
                .filter(|(_, &s)| s)
                .map(|(i, _)| {
                    let v = model.value(i, k);
                    v - theta.get(i, k) * v
                })
                .sum()
        })
        .collect()
}

/// Penalized totals, objective and feasibility of `x`.
pub fn evaluate(model: &SorsModel, influences: &[InfluenceMatrix], x: &[bool]) -> Result<Solution, ModelError> {
    let theta = penalties(model, influences, x)?;
    let totals = type_totals(model, &theta, x);
    let violations = violations_given_totals(model, &totals, x);
    Ok(Solution {
        x: x.to_vec(),
        objective: totals[0],
        feasible: violations.is_empty(),
        per_type_totals: totals,
        penalties: theta,
        violations,
        solver_stats: SolverStats::evaluation(),
    })
}

/// Violated constraints of `x`; empty iff `x` is feasible.
pub fn evaluate_feasibility(
    model: &SorsModel,
    influences: &[InfluenceMatrix],
    x: &[bool],
) -> Result<Vec<Violation>, ModelError> {
    Ok(evaluate(model, influences, x)?.violations)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::vdg::{ExplicitDependency, Quality};

    pub(crate) fn req(id: &str, cost: f64, values: &[f64]) -> Requirement {
        Requirement { id: id.to_string(), cost, values: values.to_vec() }
    }

    /// The three-requirement instance with edges 1→2 (+,0.6), 2→3 (−,0.5),
    /// 1→3 (+,0.2) on the economic graph.
    pub(crate) fn three_node_model(budget: f64) -> SorsModel {
        let g = ValueDependencyGraph::from_edges(
            3,
            [
                ExplicitDependency { source: 0, target: 1, quality: Quality::Positive, strength: 0.6 },
                ExplicitDependency { source: 1, target: 2, quality: Quality::Negative, strength: 0.5 },
                ExplicitDependency { source: 0, target: 2, quality: Quality::Positive, strength: 0.2 },
            ],
        )
        .unwrap();
        SorsModel::new(
            vec![req("r1", 1.0, &[10.0]), req("r2", 1.0, &[8.0]), req("r3", 1.0, &[6.0])],
            vec![g],
            budget,
            vec![],
            vec![],
        )
        .unwrap()
    }

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn zero_influences_give_zero_penalties() {
        let m = SorsModel::new(
            vec![req("a", 1.0, &[1.0, 2.0]), req("b", 1.0, &[3.0, 4.0])],
            vec![ValueDependencyGraph::new(2), ValueDependencyGraph::new(2)],
            5.0,
            vec![0.0],
            vec![],
        )
        .unwrap();
        let infl = m.influences();
        for x in [bits("00"), bits("01"), bits("10"), bits("11")] {
            let p = penalties(&m, &infl, &x).unwrap();
            assert!(p.rows().iter().flatten().all(|&t| t == 0.0));
        }
    }

    #[test]
    fn selected_negative_influencer_penalizes() {
        let m = SorsModel::new(
            vec![req("a", 1.0, &[1.0]), req("b", 1.0, &[1.0]), req("c", 1.0, &[1.0])],
            vec![ValueDependencyGraph::new(3)],
            5.0,
            vec![],
            vec![],
        )
        .unwrap();
        let infl = vec![InfluenceMatrix::from_rows(&[
            vec![0.0, 0.0, -0.3],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])];
        let p = penalties(&m, &infl, &bits("101")).unwrap();
        assert!((p.get(0, 0) - 0.3).abs() < 1e-15);
        let p = penalties(&m, &infl, &bits("100")).unwrap();
        assert_eq!(p.get(0, 0), 0.0);

        let infl = vec![InfluenceMatrix::from_rows(&[
            vec![0.0, 0.8, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])];
        let p = penalties(&m, &infl, &bits("100")).unwrap();
        assert_eq!(p.get(0, 0), 0.8);
        let p = penalties(&m, &infl, &bits("110")).unwrap();
        assert_eq!(p.get(0, 0), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let m = three_node_model(3.0);
        let infl = m.influences();
        assert_eq!(
            penalties(&m, &infl, &[true]),
            Err(ModelError::DimensionMismatch { expected: 3, found: 1 })
        );
        assert!(evaluate(&m, &infl, &[true, false]).is_err());
    }

    #[test]
    fn empty_selection_evaluates_to_zero() {
        let m = three_node_model(3.0);
        let s = evaluate(&m, &m.influences(), &bits("000")).unwrap();
        assert_eq!(s.objective, 0.0);
        assert!(s.feasible);
    }

    #[test]
    fn single_item_without_dependencies() {
        let m = SorsModel::new(vec![req("a", 5.0, &[10.0])], vec![ValueDependencyGraph::new(1)], 5.0, vec![], vec![])
            .unwrap();
        let s = evaluate(&m, &m.influences(), &[true]).unwrap();
        assert_eq!(s.objective, 10.0);
        assert!(s.feasible);
    }

    #[test]
    fn three_node_selection() {
        // Influences on r1: I[0][1] = 0.6, I[0][2] = 0.2 − 0.5 = −0.3.
        // x = 101: r2 ignored (0.6) and r3 selected (0.3) → θ = 0.6.
        let m = three_node_model(3.0);
        let s = evaluate(&m, &m.influences(), &bits("101")).unwrap();
        assert!((s.penalties.get(0, 0) - 0.6).abs() < 1e-15);
        assert_eq!(s.penalties.get(2, 0), 0.0);
        assert!((s.objective - (10.0 * 0.4 + 6.0)).abs() < 1e-12);
    }

    #[test]
    fn feasibility_checks() {
        let m = SorsModel::new(
            vec![req("a", 2.0, &[1.0, 1.0]), req("b", 3.0, &[1.0, 1.0])],
            vec![ValueDependencyGraph::new(2), ValueDependencyGraph::new(2)],
            5.0,
            vec![0.0],
            vec![PrecedenceConstraint::precedes(0, 1)],
        )
        .unwrap();
        let infl = m.influences();
        assert!(evaluate_feasibility(&m, &infl, &bits("00")).unwrap().is_empty());
        assert_eq!(evaluate_feasibility(&m, &infl, &bits("10")).unwrap(), vec![Violation::Precedes(0, 1)]);
        // cost 5 == budget 5
        assert!(evaluate_feasibility(&m, &infl, &bits("11")).unwrap().is_empty());

        let m = SorsModel::new(
            vec![req("a", 2.0, &[1.0, 1.0]), req("b", 3.0, &[1.0, 1.0])],
            vec![ValueDependencyGraph::new(2), ValueDependencyGraph::new(2)],
            4.0,
            vec![2.5],
            vec![PrecedenceConstraint::conflicts(0, 1)],
        )
        .unwrap();
        assert_eq!(
            evaluate_feasibility(&m, &infl, &bits("11")).unwrap(),
            vec![Violation::Budget, Violation::Social(1), Violation::Conflicts(0, 1)]
        );
        assert_eq!(evaluate_feasibility(&m, &infl, &bits("00")).unwrap(), vec![Violation::Social(1)]);
    }

    #[test]
    fn conflict_listed_twice_is_deduplicated() {
        let m = SorsModel::new(
            vec![req("a", 1.0, &[1.0]), req("b", 1.0, &[1.0])],
            vec![ValueDependencyGraph::new(2)],
            1.0,
            vec![],
            vec![PrecedenceConstraint::conflicts(0, 1), PrecedenceConstraint::conflicts(1, 0)],
        )
        .unwrap();
        assert_eq!(m.structural().len(), 1);
    }

    #[test]
    fn validation_errors() {
        let g1 = || vec![ValueDependencyGraph::new(1)];
        assert_eq!(
            SorsModel::new(vec![req("a", -1.0, &[1.0])], g1(), 1.0, vec![], vec![]),
            Err(ModelError::InvalidCost { index: 0, cost: -1.0 })
        );
        assert!(matches!(
            SorsModel::new(vec![req("a", 1.0, &[1.0, 2.0])], g1(), 1.0, vec![], vec![]),
            Err(ModelError::ValueCount { .. })
        ));
        assert!(matches!(
            SorsModel::new(vec![req("a", 1.0, &[1.0])], g1(), 1.0, vec![3.0], vec![]),
            Err(ModelError::BoundCount { .. })
        ));
        assert!(matches!(
            SorsModel::new(vec![req("a", 1.0, &[1.0])], g1(), 1.0, vec![], vec![PrecedenceConstraint::precedes(0, 0)]),
            Err(ModelError::InvalidStructural(_))
        ));
        assert!(matches!(
            SorsModel::new(vec![req("a", 1.0, &[1.0])], vec![], 1.0, vec![], vec![]),
            Err(ModelError::NoValueTypes)
        ));
    }
}
