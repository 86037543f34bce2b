//! Single-value special case: one expected value per requirement, one
//! dependency graph, no social bounds. Objective `Σ x_i (1 − θ_i) E(v_i)`.
//!
//! Kept as its own evaluation path so it can be checked against the general
//! model with one value type.

use crate::vdg::{influence_matrix, InfluenceMatrix, ValueDependencyGraph};

use super::{penalty_row, ModelError, PrecedenceConstraint, Requirement, SorsModel};

#[derive(Debug, Clone, PartialEq)]
pub struct DarsModel {
    pub ids: Vec<String>,
    pub costs: Vec<f64>,
    pub expected_values: Vec<f64>,
    pub vdg: ValueDependencyGraph,
    pub budget: f64,
    pub structural: Vec<PrecedenceConstraint>,
}

impl DarsModel {
    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn to_sors(&self) -> Result<SorsModel, ModelError> {
        let requirements = self
            .ids
            .iter()
            .zip(&self.costs)
            .zip(&self.expected_values)
            .map(|((id, &cost), &v)| Requirement { id: id.clone(), cost, values: vec![v] })
            .collect();
        SorsModel::new(requirements, vec![self.vdg.clone()], self.budget, vec![], self.structural.clone())
    }

    /// Projects a single-type model. Fails on models with social values.
    pub fn from_sors(model: &SorsModel) -> Result<Self, ModelError> {
        if model.value_types() != 1 {
            return Err(ModelError::GraphCount { expected: 1, found: model.value_types() });
        }
        Ok(Self {
            ids: model.requirements().iter().map(|r| r.id.clone()).collect(),
            costs: model.requirements().iter().map(|r| r.cost).collect(),
            expected_values: model.requirements().iter().map(|r| r.values[0]).collect(),
            vdg: model.vdgs()[0].clone(),
            budget: model.budget(),
            structural: model.structural().to_vec(),
        })
    }

    pub fn influence(&self) -> InfluenceMatrix {
        influence_matrix(&self.vdg)
    }

    pub fn is_feasible(&self, x: &[bool]) -> bool {
        let spent: f64 = x.iter().zip(&self.costs).filter(|(&s, _)| s).map(|(_, c)| c).sum();
        spent <= self.budget && self.structural.iter().all(|c| c.is_satisfied(x))
    }

    pub fn objective(&self, infl: &InfluenceMatrix, x: &[bool]) -> f64 {
        (0..self.len())
            .filter(|&i| x[i])
            .map(|i| (1.0 - penalty_row(infl, i, x)) * self.expected_values[i])
            .sum()
    }

    /// Exhaustive search over this evaluation path. Ties within `1e-9` go to
    /// the lexicographically smallest vector.
    pub fn best_selection(&self) -> Option<Vec<bool>> {
        let n = self.len();
        assert!(n < 32, "exhaustive search is limited to small instances");
        let infl = self.influence();
        let mut scored = Vec::new();
        for mask in 0u32..(1 << n) {
            // bit n-1-i of mask holds x_i, so numeric order is lexicographic order
            let x: Vec<bool> = (0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect();
            if self.is_feasible(&x) {
                scored.push((self.objective(&infl, &x), x));
            }
        }
        let best = scored.iter().map(|(v, _)| *v).fold(f64::NEG_INFINITY, f64::max);
        scored.into_iter().find(|(v, _)| *v >= best - crate::TIE_TOLERANCE).map(|(_, x)| x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::evaluate;
    use crate::model::tests::three_node_model;

    #[test]
    fn agrees_with_general_evaluation() {
        let sors = three_node_model(2.0);
        let dars = DarsModel::from_sors(&sors).unwrap();
        assert_eq!(dars.to_sors().unwrap(), sors);
        let infl = sors.influences();
        for mask in 0..8u8 {
            let x: Vec<bool> = (0..3).map(|i| mask >> i & 1 == 1).collect();
            let general = evaluate(&sors, &infl, &x).unwrap();
            assert!((general.objective - dars.objective(&infl[0], &x)).abs() < 1e-12);
            assert_eq!(general.feasible, dars.is_feasible(&x));
        }
    }

    #[test]
    fn best_selection_respects_budget() {
        // x = 110: θ_1 = max(0, I[0][2] ignored = −0.3 → 0) = 0, r2 clean → 18.
        let dars = DarsModel::from_sors(&three_node_model(2.0)).unwrap();
        assert_eq!(dars.best_selection(), Some(vec![true, true, false]));
    }
}
