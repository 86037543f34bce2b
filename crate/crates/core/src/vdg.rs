//! Signed fuzzy value-dependency graphs.
//!
//! Nodes are requirement indices. Each explicit edge carries a qualitative
//! sign and a membership strength in `[0, 1]`. A dependency is any sequence
//! of nodes joined by explicit edges; its strength is the weakest edge on it
//! and its quality is the product of the edge signs.
//!
//! [`aggregate_strengths`] computes, for every ordered pair, the strongest
//! positive and the strongest negative dependency. [`influence`] folds the
//! two into a single signed number per pair.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Qualitative sign of a dependency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quality {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
    /// Sign not known (`±`). Absorbing under serial composition.
    #[serde(rename = "±")]
    Unknown,
}

impl Quality {
    pub const ALL: [Quality; 3] = [Quality::Positive, Quality::Negative, Quality::Unknown];

    pub fn symbol(self) -> &'static str {
        match self {
            Quality::Positive => "+",
            Quality::Negative => "-",
            Quality::Unknown => "±",
        }
    }
}

impl fmt::Display for Quality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Sign of a chain `a` followed by `b`.
pub fn serial_quality(a: Quality, b: Quality) -> Quality {
    use Quality::*;
    match (a, b) {
        (Unknown, _) | (_, Unknown) => Unknown,
        (Positive, Positive) | (Negative, Negative) => Positive,
        (Positive, Negative) | (Negative, Positive) => Negative,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplicitDependency {
    pub source: usize,
    pub target: usize,
    pub quality: Quality,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("node index {index} out of range for graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },
    #[error("self-dependency on node {0}")]
    SelfLoop(usize),
    #[error("strength {strength} of edge {from}->{to} is outside [0, 1]")]
    StrengthOutOfRange { from: usize, to: usize, strength: f64 },
    #[error("duplicate edge {from}->{to}")]
    DuplicateEdge { from: usize, to: usize },
    #[error("no explicit edge {from}->{to}")]
    MissingEdge { from: usize, to: usize },
    #[error("a dependency path needs at least two nodes")]
    EmptyPath,
}

/// A signed directed fuzzy graph over `n` requirements.
///
/// Edges are functional: at most one per ordered pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValueDependencyGraph {
    n: usize,
    edges: BTreeMap<(usize, usize), ExplicitDependency>,
}

impl ValueDependencyGraph {
    pub fn new(n: usize) -> Self {
        Self { n, edges: BTreeMap::new() }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = ExplicitDependency>,
    {
        let mut g = Self::new(n);
        for e in edges {
            g.add_edge(e)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, e: ExplicitDependency) -> Result<(), GraphError> {
        for index in [e.source, e.target] {
            if index >= self.n {
                return Err(GraphError::NodeOutOfRange { index, n: self.n });
            }
        }
        if e.source == e.target {
            return Err(GraphError::SelfLoop(e.source));
        }
        if !(0.0..=1.0).contains(&e.strength) {
            return Err(GraphError::StrengthOutOfRange {
                from: e.source,
                to: e.target,
                strength: e.strength,
            });
        }
        if self.edges.contains_key(&(e.source, e.target)) {
            return Err(GraphError::DuplicateEdge { from: e.source, to: e.target });
        }
        self.edges.insert((e.source, e.target), e);
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge(&self, source: usize, target: usize) -> Option<&ExplicitDependency> {
        self.edges.get(&(source, target))
    }

    /// Edges in `(source, target)` order.
    pub fn edges(&self) -> impl Iterator<Item = &ExplicitDependency> {
        self.edges.values()
    }

    pub fn remove_edge(&mut self, source: usize, target: usize) -> Option<ExplicitDependency> {
        self.edges.remove(&(source, target))
    }

    fn path_edges<'a>(
        &'a self,
        path: &'a [usize],
    ) -> Result<impl Iterator<Item = &'a ExplicitDependency> + 'a, GraphError> {
        if path.len() < 2 {
            return Err(GraphError::EmptyPath);
        }
        for w in path.windows(2) {
            if self.edge(w[0], w[1]).is_none() {
                return Err(GraphError::MissingEdge { from: w[0], to: w[1] });
            }
        }
        Ok(path.windows(2).map(move |w| &self.edges[&(w[0], w[1])]))
    }

    /// Strength of a dependency: the weakest edge along `path`.
    pub fn path_strength(&self, path: &[usize]) -> Result<f64, GraphError> {
        Ok(self.path_edges(path)?.map(|e| e.strength).fold(f64::INFINITY, f64::min))
    }

    /// Quality of a dependency: the serial composition of its edge signs.
    pub fn path_quality(&self, path: &[usize]) -> Result<Quality, GraphError> {
        let mut edges = self.path_edges(path)?;
        let first = edges.next().map(|e| e.quality).ok_or(GraphError::EmptyPath)?;
        Ok(edges.fold(first, |q, e| serial_quality(q, e.quality)))
    }
}

/// Strongest positive and strongest negative dependency between a pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StrengthPair {
    pub positive: f64,
    pub negative: f64,
}

impl StrengthPair {
    pub const ZERO: StrengthPair = StrengthPair { positive: 0.0, negative: 0.0 };

    pub fn new(positive: f64, negative: f64) -> Self {
        Self { positive, negative }
    }
}

/// Dense row-major `n × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> SquareMatrix<T> {
    pub fn filled(n: usize, value: T) -> Self {
        Self { n, data: vec![value; n * n] }
    }
}

impl<T> SquareMatrix<T> {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &T)> {
        let n = self.n;
        self.data.iter().enumerate().map(move |(idx, v)| ((idx / n, idx % n), v))
    }
}

impl<T> std::ops::Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of bounds for {}", self.n);
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for SquareMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of bounds for {}", self.n);
        &mut self.data[i * self.n + j]
    }
}

pub type StrengthMatrix = SquareMatrix<StrengthPair>;

/// Composition of two aggregates in series: signs multiply, strengths take
/// the minimum, alternatives take the maximum.
#[inline]
fn compose(a: StrengthPair, b: StrengthPair) -> StrengthPair {
    StrengthPair {
        positive: a.positive.min(b.positive).max(a.negative.min(b.negative)),
        negative: a.positive.min(b.negative).max(a.negative.min(b.positive)),
    }
}

/// All-pairs strongest positive and negative dependencies.
///
/// Modified Floyd-Warshall over the two signs. Besides the four sign
/// relaxations through a pivot `k`, a negative cycle through `k` may be
/// spliced in to flip the sign of a detour, capped by the cycle's strength.
/// Unknown edges are never seeded. Pairs with no dependency get `(0, 0)` and
/// the diagonal is `(0, 0)` on return.
pub fn aggregate_strengths(g: &ValueDependencyGraph) -> StrengthMatrix {
    let n = g.node_count();
    let mut d = StrengthMatrix::filled(n, StrengthPair::ZERO);
    for e in g.edges() {
        match e.quality {
            Quality::Positive => d[(e.source, e.target)].positive = e.strength,
            Quality::Negative => d[(e.source, e.target)].negative = e.strength,
            Quality::Unknown => {}
        }
    }

    let mut col_k = vec![StrengthPair::ZERO; n];
    for k in 0..n {
        let flip = d[(k, k)].negative;
        // Column k through the negative cycle at k: either sign is reachable.
        for (i, c) in col_k.iter_mut().enumerate() {
            let ik = d[(i, k)];
            let cycled = ik.positive.max(ik.negative).min(flip);
            *c = StrengthPair {
                positive: ik.positive.max(cycled),
                negative: ik.negative.max(cycled),
            };
        }
        let row_k: Vec<StrengthPair> = d.row(k).to_vec();
        for (i, &ik) in col_k.iter().enumerate() {
            if ik.positive == 0.0 && ik.negative == 0.0 {
                continue;
            }
            let row = &mut d.data[i * n..(i + 1) * n];
            for (cell, &kj) in row.iter_mut().zip(&row_k) {
                let via = compose(ik, kj);
                if via.positive > cell.positive {
                    cell.positive = via.positive;
                }
                if via.negative > cell.negative {
                    cell.negative = via.negative;
                }
            }
        }
    }

    for i in 0..n {
        d[(i, i)] = StrengthPair::ZERO;
    }
    d
}

/// Overall influence `I[i][j] = positive − negative`: how requirement `j`
/// bears on the value of requirement `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceMatrix(SquareMatrix<f64>);

impl InfluenceMatrix {
    pub fn zeros(n: usize) -> Self {
        Self(SquareMatrix::filled(n, 0.0))
    }

    /// Builds a matrix from explicit entries. Off-diagonal values must lie in
    /// `[-1, 1]`; the diagonal is forced to zero.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = SquareMatrix::filled(n, 0.0);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "influence matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                assert!((-1.0..=1.0).contains(&v), "influence {v} outside [-1, 1]");
                if i != j {
                    m[(i, j)] = v;
                }
            }
        }
        Self(m)
    }

    pub fn size(&self) -> usize {
        self.0.size()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn row_has_influence(&self, i: usize) -> bool {
        self.row(i).iter().any(|&v| v != 0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.0.iter().map(|(ij, &v)| (ij, v))
    }
}

pub fn influence(pairs: &StrengthMatrix) -> InfluenceMatrix {
    let n = pairs.size();
    let mut m = SquareMatrix::filled(n, 0.0);
    for ((i, j), p) in pairs.iter() {
        if i != j {
            m[(i, j)] = p.positive - p.negative;
        }
    }
    InfluenceMatrix(m)
}

/// Shorthand for `influence(&aggregate_strengths(g))`.
pub fn influence_matrix(g: &ValueDependencyGraph) -> InfluenceMatrix {
    influence(&aggregate_strengths(g))
}
