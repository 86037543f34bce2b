//! Brute-force reference computations. Slow by construction; used to check
//! the graph algebra and the optimizer on small instances.

use thiserror::Error;

use crate::model::{evaluate, ModelError, Solution, SolveStatus, SolverStats, SorsModel, Backend};
use crate::vdg::{Quality, StrengthMatrix, StrengthPair, ValueDependencyGraph};
use crate::TIE_TOLERANCE;

pub const DEFAULT_GRAPH_CAP: usize = 8;
pub const DEFAULT_SOLVE_CAP: usize = 15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance has {n} nodes, oracle cap is {cap}")]
    InstanceTooLarge { n: usize, cap: usize },
    #[error("no feasible selection exists")]
    Infeasible,
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn record(best: &mut StrengthPair, quality: Quality, strength: f64) {
    match quality {
        Quality::Positive => best.positive = best.positive.max(strength),
        Quality::Negative => best.negative = best.negative.max(strength),
        Quality::Unknown => {}
    }
}

/// Strongest positive and negative dependency per ordered pair, taken over
/// every dependency sequence: any walk along explicit edges, nodes may
/// repeat.
///
/// A walk longer than `2n − 1` edges revisits some (node, sign) state and can
/// be shortened without lowering its strength, so walks up to that length
/// cover the supremum. `best[len][j]` holds the strongest walk of exactly
/// `len` edges from the source to `j`, per sign; the walk's own strength and
/// sign come from `path_strength`/`path_quality` semantics applied edge by
/// edge.
pub fn enumerate_path_strengths(g: &ValueDependencyGraph, cap: usize) -> Result<StrengthMatrix, OracleError> {
    let n = g.node_count();
    if n > cap {
        return Err(OracleError::InstanceTooLarge { n, cap });
    }
    let mut out = StrengthMatrix::filled(n, StrengthPair::ZERO);
    let max_len = (2 * n).saturating_sub(1);
    for source in 0..n {
        let mut layer = vec![StrengthPair::ZERO; n];
        for e in g.edges().filter(|e| e.source == source) {
            record(&mut layer[e.target], e.quality, e.strength);
        }
        for len in 1..=max_len {
            for (j, p) in layer.iter().enumerate() {
                if j != source {
                    let cell = &mut out[(source, j)];
                    cell.positive = cell.positive.max(p.positive);
                    cell.negative = cell.negative.max(p.negative);
                }
            }
            if len == max_len {
                break;
            }
            let mut next = vec![StrengthPair::ZERO; n];
            for e in g.edges() {
                let here = layer[e.source];
                for (q, s) in [(Quality::Positive, here.positive), (Quality::Negative, here.negative)] {
                    if s > 0.0 {
                        let quality = crate::vdg::serial_quality(q, e.quality);
                        record(&mut next[e.target], quality, s.min(e.strength));
                    }
                }
            }
            layer = next;
        }
    }
    Ok(out)
}

/// Same quantity restricted to simple paths (no repeated node), by explicit
/// depth-first enumeration.
///
/// Never exceeds [`enumerate_path_strengths`]; the two agree whenever no
/// cycle can flip the sign of a detour (in particular on acyclic graphs).
pub fn enumerate_simple_path_strengths(
    g: &ValueDependencyGraph,
    cap: usize,
) -> Result<StrengthMatrix, OracleError> {
    let n = g.node_count();
    if n > cap {
        return Err(OracleError::InstanceTooLarge { n, cap });
    }
    let mut out = StrengthMatrix::filled(n, StrengthPair::ZERO);
    let mut path = Vec::with_capacity(n);
    let mut on_path = vec![false; n];
    for source in 0..n {
        path.push(source);
        on_path[source] = true;
        walk_simple(g, &mut path, &mut on_path, &mut out);
        on_path[source] = false;
        path.pop();
    }
    Ok(out)
}

fn walk_simple(g: &ValueDependencyGraph, path: &mut Vec<usize>, on_path: &mut [bool], out: &mut StrengthMatrix) {
    let last = *path.last().unwrap();
    for next in 0..g.node_count() {
        if on_path[next] || g.edge(last, next).is_none() {
            continue;
        }
        path.push(next);
        on_path[next] = true;
        let strength = g.path_strength(path).expect("path follows explicit edges");
        let quality = g.path_quality(path).expect("path follows explicit edges");
        record(&mut out[(path[0], next)], quality, strength);
        walk_simple(g, path, on_path, out);
        on_path[next] = false;
        path.pop();
    }
}

/// Bit string `x_1 … x_n` for `mask`, `x_1` most significant.
pub fn selection_from_mask(mask: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect()
}

/// Literal maximization over all `2^n` selections.
///
/// Among feasible vectors within [`TIE_TOLERANCE`] of the best objective the
/// lexicographically smallest wins.
pub fn exhaustive_solve(model: &SorsModel, cap: usize) -> Result<Solution, OracleError> {
    let n = model.len();
    if n > cap || n >= 64 {
        return Err(OracleError::InstanceTooLarge { n, cap });
    }
    let start = std::time::Instant::now();
    let influences = model.influences();
    let mut feasible = Vec::new();
    for mask in 0..(1u64 << n) {
        let s = evaluate(model, &influences, &selection_from_mask(mask, n))?;
        if s.feasible {
            feasible.push(s);
        }
    }
    let best = feasible.iter().map(|s| s.objective).fold(f64::NEG_INFINITY, f64::max);
    // masks ascend, so the first hit is the lexicographically smallest
    let mut winner = feasible
        .into_iter()
        .find(|s| s.objective >= best - TIE_TOLERANCE)
        .ok_or(OracleError::Infeasible)?;
    winner.solver_stats = SolverStats {
        backend: Backend::Exhaustive,
        status: SolveStatus::Optimal,
        nodes_explored: 1 << n,
        wall_time: start.elapsed(),
        gap: 0.0,
    };
    Ok(winner)
}
