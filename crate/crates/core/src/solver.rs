//! Exact depth-first branch-and-bound over the selection vector.
//!
//! Penalties are fully determined once `x` is fixed, so only `x` is
//! branched on; every leaf is scored with [`evaluate`]. Bounds relax the
//! model by dropping penalties, which can only raise the economic total, and
//! by filling the residual budget fractionally in value/cost order.
//!
//! The search runs in two phases. The first finds the optimal objective
//! value, branching on the most profitable free variable with `1` tried
//! before `0`. The second walks selections in lexicographic order and stops
//! at the first feasible one within [`TIE_TOLERANCE`] of that value. The
//! returned vector therefore does not depend on the thread count or on the
//! order in which parallel subtrees finish.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{evaluate, Backend, ModelError, Solution, SolveStatus, SolverStats, SorsModel};
use crate::oracle::{exhaustive_solve, OracleError, DEFAULT_SOLVE_CAP};
use crate::vdg::InfluenceMatrix;
use crate::TIE_TOLERANCE;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendChoice {
    Exhaustive,
    BranchAndBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub backend: BackendChoice,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub threads: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { backend: BackendChoice::BranchAndBound, node_limit: None, time_limit: None, threads: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("no feasible selection exists")]
    Infeasible,
    #[error("search limit reached (gap {gap})")]
    LimitReached { best: Option<Box<Solution>>, gap: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("instance with {n} requirements exceeds the exhaustive cap of {cap}")]
    InstanceTooLarge { n: usize, cap: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<OracleError> for SolveError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Infeasible => SolveError::Infeasible,
            OracleError::InstanceTooLarge { n, cap } => SolveError::InstanceTooLarge { n, cap },
            OracleError::Model(m) => SolveError::Model(m),
        }
    }
}

pub fn solve(model: &SorsModel, cfg: &SolverConfig) -> Result<Solution, SolveError> {
    if cfg.threads == 0 {
        return Err(SolveError::InvalidConfig("threads must be positive"));
    }
    if cfg.node_limit == Some(0) {
        return Err(SolveError::InvalidConfig("node limit must be positive"));
    }
    if cfg.time_limit == Some(Duration::ZERO) {
        return Err(SolveError::InvalidConfig("time limit must be positive"));
    }
    match cfg.backend {
        BackendChoice::Exhaustive => Ok(exhaustive_solve(model, DEFAULT_SOLVE_CAP)?),
        BackendChoice::BranchAndBound => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|_| SolveError::InvalidConfig("could not start worker threads"))?;
            pool.install(|| BranchAndBound::new(model, cfg).run())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixed {
    Free,
    Zero,
    One,
}

/// A partial assignment with its optimistic bound.
#[derive(Debug, Clone)]
pub struct SearchNode {
    pub fixed: Vec<Fixed>,
    pub depth: usize,
    pub bound: f64,
}

fn slack(v: f64) -> f64 {
    1e-9 * (1.0 + v.abs())
}

/// Precomputed problem data shared by every node.
pub(crate) struct Problem<'a> {
    pub(crate) model: &'a SorsModel,
    pub(crate) influences: Vec<InfluenceMatrix>,
    /// Requirements by descending economic value per unit cost.
    by_ratio: Vec<usize>,
    /// `requires[i]`: every `j` with `x_i ≤ x_j`.
    requires: Vec<Vec<usize>>,
    required_by: Vec<Vec<usize>>,
    conflicts: Vec<Vec<usize>>,
}

impl<'a> Problem<'a> {
    pub(crate) fn new(model: &'a SorsModel) -> Self {
        use crate::model::StructuralKind;
        let n = model.len();
        let mut by_ratio: Vec<usize> = (0..n).collect();
        let ratio = |i: usize| {
            let (v, c) = (model.value(i, 0), model.cost(i));
            if c > 0.0 {
                v / c
            } else if v > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        };
        by_ratio.sort_by(|&a, &b| ratio(b).total_cmp(&ratio(a)).then(a.cmp(&b)));

        let mut requires = vec![Vec::new(); n];
        let mut required_by = vec![Vec::new(); n];
        let mut conflicts = vec![Vec::new(); n];
        for c in model.structural() {
            match c.kind {
                StructuralKind::Precedes => {
                    requires[c.i].push(c.j);
                    required_by[c.j].push(c.i);
                }
                StructuralKind::ConflictsWith => {
                    conflicts[c.i].push(c.j);
                    conflicts[c.j].push(c.i);
                }
            }
        }
        Self { model, influences: model.influences(), by_ratio, requires, required_by, conflicts }
    }

    /// Fixes `var` and everything the structural couplings force with it.
    /// Returns false on contradiction.
    pub(crate) fn assign(&self, fixed: &mut [Fixed], var: usize, value: bool) -> bool {
        let mut stack = vec![(var, value)];
        while let Some((v, val)) = stack.pop() {
            let want = if val { Fixed::One } else { Fixed::Zero };
            match fixed[v] {
                Fixed::Free => fixed[v] = want,
                f if f == want => continue,
                _ => return false,
            }
            if val {
                stack.extend(self.requires[v].iter().map(|&j| (j, true)));
                stack.extend(self.conflicts[v].iter().map(|&j| (j, false)));
            } else {
                stack.extend(self.required_by[v].iter().map(|&i| (i, false)));
            }
        }
        true
    }

    /// Upper bound on the objective of any feasible completion, or `None`
    /// when no completion can be feasible.
    pub(crate) fn bound(&self, fixed: &[Fixed]) -> Option<f64> {
        let m = self.model;
        let mut spent = 0.0;
        let mut value = 0.0;
        for (i, f) in fixed.iter().enumerate() {
            if *f == Fixed::One {
                spent += m.cost(i);
                value += m.value(i, 0);
            }
        }
        if spent > m.budget() + slack(m.budget()) {
            return None;
        }
        for (k, &alpha) in m.social_bounds().iter().enumerate() {
            let reachable: f64 =
                (0..m.len()).filter(|&i| fixed[i] != Fixed::Zero).map(|i| m.value(i, k + 1)).sum();
            if reachable < alpha - slack(alpha) {
                return None;
            }
        }
        let mut room = (m.budget() - spent).max(0.0);
        for &i in &self.by_ratio {
            if fixed[i] != Fixed::Free {
                continue;
            }
            let (c, v) = (m.cost(i), m.value(i, 0));
            if v <= 0.0 {
                break;
            }
            if c <= room {
                room -= c;
                value += v;
            } else {
                value += v * room / c;
                break;
            }
        }
        Some(value)
    }

    pub(crate) fn root(&self) -> Option<SearchNode> {
        let fixed = vec![Fixed::Free; self.model.len()];
        let bound = self.bound(&fixed)?;
        Some(SearchNode { fixed, depth: 0, bound })
    }

    /// Children of `node` after branching on `var`, in the given value order.
    fn children(&self, node: &SearchNode, var: usize, order: [bool; 2]) -> Vec<SearchNode> {
        order
            .into_iter()
            .filter_map(|val| {
                let mut fixed = node.fixed.clone();
                if !self.assign(&mut fixed, var, val) {
                    return None;
                }
                let bound = self.bound(&fixed)?;
                Some(SearchNode { fixed, depth: node.depth + 1, bound })
            })
            .collect()
    }

    fn leaf_x(fixed: &[Fixed]) -> Option<Vec<bool>> {
        fixed
            .iter()
            .map(|f| match f {
                Fixed::Free => None,
                Fixed::Zero => Some(false),
                Fixed::One => Some(true),
            })
            .collect()
    }

    fn evaluate_leaf(&self, fixed: &[Fixed]) -> Solution {
        let x = Self::leaf_x(fixed).expect("leaf has every variable fixed");
        evaluate(self.model, &self.influences, &x).expect("dimensions checked at construction")
    }
}

/// `f64` stored as bits for lock-free max updates.
struct AtomicF64(AtomicU64);

impl AtomicF64 {
    fn new(v: f64) -> Self {
        Self(AtomicU64::new(v.to_bits()))
    }

    fn load(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Acquire))
    }

    /// Raises the stored value to `v`; true if `v` was strictly larger.
    fn fetch_max(&self, v: f64) -> bool {
        self.0
            .fetch_update(Ordering::AcqRel, Ordering::Acquire, |cur| {
                (v > f64::from_bits(cur)).then_some(v.to_bits())
            })
            .is_ok()
    }
}

struct Limits {
    start: Instant,
    node_limit: Option<u64>,
    time_limit: Option<Duration>,
    nodes: AtomicU64,
    aborted: AtomicBool,
    /// Largest bound among subtrees dropped because a limit fired.
    dropped_bound: AtomicF64,
}

impl Limits {
    /// Counts a node; false once a limit has fired.
    fn tick(&self) -> bool {
        if self.aborted.load(Ordering::Relaxed) {
            return false;
        }
        let count = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        let over_nodes = self.node_limit.is_some_and(|l| count > l);
        // clock reads are comparatively costly; sample them
        let over_time = count.is_multiple_of(256) && self.time_limit.is_some_and(|t| self.start.elapsed() >= t);
        if over_nodes || over_time {
            self.aborted.store(true, Ordering::Relaxed);
            return false;
        }
        true
    }

    fn drop_node(&self, node: &SearchNode) {
        self.dropped_bound.fetch_max(node.bound);
    }
}

struct BranchAndBound<'a> {
    problem: Problem<'a>,
    limits: Limits,
    frontier_size: usize,
}

impl<'a> BranchAndBound<'a> {
    fn new(model: &'a SorsModel, cfg: &SolverConfig) -> Self {
        Self {
            problem: Problem::new(model),
            limits: Limits {
                start: Instant::now(),
                node_limit: cfg.node_limit,
                time_limit: cfg.time_limit,
                nodes: AtomicU64::new(0),
                aborted: AtomicBool::new(false),
                dropped_bound: AtomicF64::new(f64::NEG_INFINITY),
            },
            frontier_size: if cfg.threads > 1 { 8 * cfg.threads } else { 1 },
        }
    }

    fn stats(&self, status: SolveStatus, gap: f64) -> SolverStats {
        SolverStats {
            backend: Backend::BranchAndBound,
            status,
            nodes_explored: self.limits.nodes.load(Ordering::Relaxed),
            wall_time: self.limits.start.elapsed(),
            gap,
        }
    }

    fn run(self) -> Result<Solution, SolveError> {
        let Some(root) = self.problem.root() else {
            return Err(SolveError::Infeasible);
        };

        let incumbent = AtomicF64::new(f64::NEG_INFINITY);
        let witness: Mutex<Option<Solution>> = Mutex::new(None);
        let frontier = self.expand(root.clone(), |p, n| p.next_by_ratio(n), [true, false]);
        frontier.par_iter().for_each(|node| self.improve(node.clone(), &incumbent, &witness));

        let best = incumbent.load();
        let witness = witness.into_inner().unwrap();
        if self.limits.aborted.load(Ordering::Relaxed) {
            return Err(self.limit_result(witness, best));
        }
        let Some(witness) = witness else {
            return Err(SolveError::Infeasible);
        };

        let threshold = best - TIE_TOLERANCE;
        let frontier = self.expand(root, |_, n| n.fixed.iter().position(|f| *f == Fixed::Free), [false, true]);
        let first_hit = AtomicUsize::new(usize::MAX);
        let hits: Vec<Option<Solution>> = frontier
            .par_iter()
            .enumerate()
            .map(|(idx, node)| {
                if first_hit.load(Ordering::Acquire) < idx {
                    return None;
                }
                let hit = self.first_lexicographic(node.clone(), threshold, idx, &first_hit);
                if hit.is_some() {
                    first_hit.fetch_min(idx, Ordering::AcqRel);
                }
                hit
            })
            .collect();

        if self.limits.aborted.load(Ordering::Relaxed) {
            return Err(self.limit_result(Some(witness), best));
        }
        let mut winner = hits.into_iter().flatten().next().unwrap_or(witness);
        winner.solver_stats = self.stats(SolveStatus::Optimal, 0.0);
        Ok(winner)
    }

    fn limit_result(&self, witness: Option<Solution>, best: f64) -> SolveError {
        let dropped = self.limits.dropped_bound.load();
        match witness {
            Some(mut s) => {
                let gap = (dropped - best).max(0.0);
                s.solver_stats = self.stats(SolveStatus::LimitReached, gap);
                SolveError::LimitReached { best: Some(Box::new(s)), gap }
            }
            None => SolveError::LimitReached { best: None, gap: f64::INFINITY },
        }
    }

    /// Breadth-first expansion into at least `frontier_size` open nodes (or
    /// until only leaves remain), preserving left-to-right DFS order.
    fn expand<F>(&self, root: SearchNode, pick: F, order: [bool; 2]) -> Vec<SearchNode>
    where
        F: Fn(&Problem, &SearchNode) -> Option<usize>,
    {
        let mut frontier = vec![root];
        while frontier.len() < self.frontier_size {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            let mut grew = false;
            for node in frontier {
                match pick(&self.problem, &node) {
                    Some(var) => {
                        grew = true;
                        next.extend(self.problem.children(&node, var, order));
                    }
                    None => next.push(node),
                }
            }
            frontier = next;
            if !grew {
                break;
            }
        }
        frontier
    }

    /// Phase one: raise the shared incumbent to the optimal value.
    fn improve(&self, node: SearchNode, incumbent: &AtomicF64, witness: &Mutex<Option<Solution>>) {
        if !self.limits.tick() {
            self.limits.drop_node(&node);
            return;
        }
        let best = incumbent.load();
        if node.bound + slack(node.bound) < best {
            return;
        }
        match self.problem.next_by_ratio(&node) {
            None => {
                let s = self.problem.evaluate_leaf(&node.fixed);
                if s.feasible && incumbent.fetch_max(s.objective) {
                    let mut w = witness.lock().unwrap();
                    if w.as_ref().is_none_or(|o| s.objective > o.objective) {
                        *w = Some(s);
                    }
                }
            }
            Some(var) => {
                for child in self.problem.children(&node, var, [true, false]) {
                    self.improve(child, incumbent, witness);
                }
            }
        }
    }

    /// Phase two: first feasible leaf in lexicographic order whose objective
    /// reaches `threshold`.
    fn first_lexicographic(
        &self,
        node: SearchNode,
        threshold: f64,
        subtree: usize,
        first_hit: &AtomicUsize,
    ) -> Option<Solution> {
        if first_hit.load(Ordering::Acquire) < subtree || !self.limits.tick() {
            return None;
        }
        if node.bound + slack(node.bound) < threshold {
            return None;
        }
        match node.fixed.iter().position(|f| *f == Fixed::Free) {
            None => {
                let s = self.problem.evaluate_leaf(&node.fixed);
                (s.feasible && s.objective >= threshold).then_some(s)
            }
            Some(var) => self
                .problem
                .children(&node, var, [false, true])
                .into_iter()
                .find_map(|child| self.first_lexicographic(child, threshold, subtree, first_hit)),
        }
    }
}

impl Problem<'_> {
    fn next_by_ratio(&self, node: &SearchNode) -> Option<usize> {
        self.by_ratio.iter().copied().find(|&i| node.fixed[i] == Fixed::Free)
    }
}
