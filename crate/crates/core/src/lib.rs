//! Requirement selection under economic and social value dependencies.
//!
//! Requirements carry a cost and one value per value type (type 0 is
//! economic, the rest are social). Signed fuzzy dependency graphs, one per
//! type, describe how the presence or absence of one requirement affects the
//! value of another. The crate computes the resulting influences, evaluates
//! the penalized value of any selection, and finds the selection maximizing
//! penalized economic value under a budget, social lower bounds and
//! precedence/conflict couplings.
//!
//! - [`vdg`]: dependency graphs and the all-pairs influence algebra.
//! - [`model`]: the selection model and evaluation of a selection vector.
//! - [`solver`]: exact branch-and-bound.
//! - [`oracle`]: brute-force references for testing.
//! - [`lpexport`]: the linearized model as a CPLEX-LP file.
//! - [`io`]: project files and reports.
//! - [`cli`]: the `sors` command.

pub mod cli;
pub mod io;
pub mod lpexport;
pub mod model;
pub mod oracle;
pub mod solver;
pub mod vdg;

/// Objectives this close to the best one count as tied; ties go to the
/// lexicographically smallest selection.
pub const TIE_TOLERANCE: f64 = 1e-9;

pub use model::{evaluate, evaluate_feasibility, penalties, Solution, SorsModel};
pub use solver::{solve, SolveError, SolverConfig};
pub use vdg::{aggregate_strengths, influence, InfluenceMatrix, Quality, ValueDependencyGraph};
