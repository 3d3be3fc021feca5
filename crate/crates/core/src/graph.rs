//! Dense graph representation shared by every engine.
//!
//! Adjacency is stored as one byte per ordered vertex pair. Undirected graphs
//! use `0`/`1`; directed graphs use the four-valued [`EdgeCode`], stored so
//! that `code(u, v)` is always the mirror of `code(v, u)`. Engines split label
//! classes on the raw byte, which gives a two-way split for undirected inputs
//! and a four-way split for directed ones without any special casing.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GraphError;

pub type Label = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GraphKind {
    Undirected,
    Directed,
}

/// Relation between an ordered pair `(u, v)` of a directed graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeCode {
    None = 0,
    /// Arc `u -> v` only.
    Forward = 1,
    /// Arc `v -> u` only.
    Backward = 2,
    Both = 3,
}

impl EdgeCode {
    pub fn from_u8(raw: u8) -> Option<EdgeCode> {
        match raw {
            0 => Some(EdgeCode::None),
            1 => Some(EdgeCode::Forward),
            2 => Some(EdgeCode::Backward),
            3 => Some(EdgeCode::Both),
            _ => None,
        }
    }

    pub fn mirror(self) -> EdgeCode {
        match self {
            EdgeCode::Forward => EdgeCode::Backward,
            EdgeCode::Backward => EdgeCode::Forward,
            other => other,
        }
    }
}

/// One entry of an edge list. `code` is only meaningful for directed graphs;
/// when absent a directed edge is the single arc `u -> v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub code: Option<EdgeCode>,
}

impl Edge {
    pub fn new(u: usize, v: usize) -> Edge {
        Edge { u, v, code: None }
    }

    pub fn with_code(u: usize, v: usize, code: EdgeCode) -> Edge {
        Edge { u, v, code: Some(code) }
    }
}

impl From<(usize, usize)> for Edge {
    fn from((u, v): (usize, usize)) -> Edge {
        Edge::new(u, v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Graph {
    n: usize,
    kind: GraphKind,
    adj: Vec<u8>,
    labels: Option<Vec<Label>>,
}

impl Graph {
    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize, kind: GraphKind) -> Graph {
        Graph { n, kind, adj: vec![0; n * n], labels: None }
    }

    /// Builds a graph from an edge list. Duplicate edges collapse; two plain
    /// arcs `u -> v` and `v -> u` of a directed graph combine into
    /// [`EdgeCode::Both`]. An explicit code that disagrees with a code already
    /// assigned to the same pair is rejected.
    pub fn from_edges<E>(
        n: usize,
        kind: GraphKind,
        edges: impl IntoIterator<Item = E>,
        labels: Option<Vec<Label>>,
    ) -> Result<Graph, GraphError>
    where
        E: Into<Edge>,
    {
        let mut g = Graph::empty(n, kind);
        if let Some(labels) = labels {
            if labels.len() != n {
                return Err(GraphError::LabelCount { expected: n, found: labels.len() });
            }
            g.labels = Some(labels);
        }
        let mut explicit = vec![false; n * n];
        for edge in edges {
            let Edge { u, v, code } = edge.into();
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: u.max(v), n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let idx = u * n + v;
            let new_code = match (kind, code) {
                (GraphKind::Undirected, None) => 1,
                (GraphKind::Undirected, Some(_)) => return Err(GraphError::CodeOnUndirected { u, v }),
                (GraphKind::Directed, Some(EdgeCode::None)) => return Err(GraphError::ConflictingCode { u, v }),
                (GraphKind::Directed, Some(c)) => {
                    let existing = g.adj[idx];
                    if explicit[idx] && existing != c as u8 {
                        return Err(GraphError::ConflictingCode { u, v });
                    }
                    explicit[idx] = true;
                    explicit[v * n + u] = true;
                    c as u8
                }
                (GraphKind::Directed, None) => {
                    let merged = g.adj[idx] | EdgeCode::Forward as u8;
                    if explicit[idx] && merged != g.adj[idx] {
                        return Err(GraphError::ConflictingCode { u, v });
                    }
                    merged
                }
            };
            g.set_raw(u, v, new_code);
        }
        Ok(g)
    }

    fn set_raw(&mut self, u: usize, v: usize, code: u8) {
        self.adj[u * self.n + v] = code;
        let mirrored = match self.kind {
            GraphKind::Undirected => code,
            GraphKind::Directed => EdgeCode::from_u8(code).map(|c| c.mirror() as u8).unwrap_or(0),
        };
        self.adj[v * self.n + u] = mirrored;
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    #[inline]
    pub fn is_directed(&self) -> bool {
        self.kind == GraphKind::Directed
    }

    /// Raw adjacency byte of `(u, v)`: `0/1` undirected, an [`EdgeCode`]
    /// discriminant when directed.
    #[inline]
    pub fn code(&self, u: usize, v: usize) -> u8 {
        self.adj[u * self.n + v]
    }

    #[inline]
    pub fn row(&self, u: usize) -> &[u8] {
        &self.adj[u * self.n..(u + 1) * self.n]
    }

    pub fn edge_code(&self, u: usize, v: usize) -> EdgeCode {
        match self.kind {
            GraphKind::Undirected if self.code(u, v) != 0 => EdgeCode::Both,
            _ => EdgeCode::from_u8(self.code(u, v)).unwrap_or(EdgeCode::None),
        }
    }

    #[inline]
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.code(u, v) != 0
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn label(&self, v: usize) -> Option<Label> {
        self.labels.as_ref().map(|l| l[v])
    }

    pub fn is_labeled(&self) -> bool {
        self.labels.is_some()
    }

    pub fn set_labels(&mut self, labels: Option<Vec<Label>>) -> Result<(), GraphError> {
        if let Some(l) = &labels {
            if l.len() != self.n {
                return Err(GraphError::LabelCount { expected: self.n, found: l.len() });
            }
        }
        self.labels = labels;
        Ok(())
    }

    /// Undirected degree, or total (in + out) degree for directed graphs.
    pub fn degree(&self, v: usize) -> usize {
        self.row(v)
            .iter()
            .map(|&c| match c {
                0 => 0,
                3 if self.is_directed() => 2,
                _ => 1,
            })
            .sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    /// Number of undirected edges, or of unordered adjacent pairs when directed.
    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|u| ((u + 1)..self.n).filter(|&v| self.adjacent(u, v)).count()).sum()
    }

    /// Neighbours of `v` in ascending order, ignoring direction.
    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(v).iter().enumerate().filter(|(_, &c)| c != 0).map(|(u, _)| u)
    }

    /// Forward arcs of a directed graph, or each undirected edge once with `u < v`.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                match self.kind {
                    GraphKind::Undirected if self.adjacent(u, v) => out.push(Edge::new(u, v)),
                    GraphKind::Directed if self.adjacent(u, v) => out.push(Edge::with_code(u, v, self.edge_code(u, v))),
                    _ => {}
                }
            }
        }
        out
    }

    /// Relabels vertices so that old vertex `v` becomes `p.apply(v)`.
    pub fn permute(&self, p: &Permutation) -> Result<Graph, GraphError> {
        if p.len() != self.n {
            return Err(GraphError::PermutationSize { expected: self.n, found: p.len() });
        }
        let n = self.n;
        let mut adj = vec![0u8; n * n];
        for u in 0..n {
            let pu = p.apply(u);
            for v in 0..n {
                adj[pu * n + p.apply(v)] = self.adj[u * n + v];
            }
        }
        let labels = self.labels.as_ref().map(|l| {
            let mut out = vec![0; n];
            for (v, &lab) in l.iter().enumerate() {
                out[p.apply(v)] = lab;
            }
            out
        });
        Ok(Graph { n, kind: self.kind, adj, labels })
    }

    /// Connected components (direction ignored). Each component is sorted and
    /// components are listed by their smallest vertex.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut comp = Vec::new();
            while let Some(x) = queue.pop_front() {
                comp.push(x);
                for y in self.neighbours(x) {
                    if !seen[y] {
                        seen[y] = true;
                        queue.push_back(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Erdős-Rényi style undirected graph; deterministic in `(n, density, seed)`.
    pub fn random(n: usize, density: f64, seed: u64) -> Graph {
        let density = density.clamp(0.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = Graph::empty(n, GraphKind::Undirected);
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.random_bool(density) {
                    g.set_raw(u, v, 1);
                }
            }
        }
        g
    }

    /// Random directed graph: each unordered pair is adjacent with probability
    /// `density`, and adjacent pairs get a uniformly drawn non-empty code.
    pub fn random_directed(n: usize, density: f64, seed: u64) -> Graph {
        let density = density.clamp(0.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = Graph::empty(n, GraphKind::Directed);
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.random_bool(density) {
                    g.set_raw(u, v, rng.random_range(1..=3u8));
                }
            }
        }
        g
    }

    /// Returns a copy carrying labels drawn uniformly from `0..alphabet`.
    pub fn with_random_labels(&self, alphabet: Label, seed: u64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = (0..self.n).map(|_| rng.random_range(0..alphabet.max(1))).collect();
        Graph { labels: Some(labels), ..self.clone() }
    }

    /// Checks the structural invariants; graphs built through this module always pass.
    pub fn validate(&self) -> Result<(), GraphError> {
        for u in 0..self.n {
            if self.code(u, u) != 0 {
                return Err(GraphError::SelfLoop(u));
            }
            for v in 0..self.n {
                let (a, b) = (self.code(u, v), self.code(v, u));
                let ok = match self.kind {
                    GraphKind::Undirected => a == b && a <= 1,
                    GraphKind::Directed => EdgeCode::from_u8(a).map(|c| c.mirror() as u8) == Some(b),
                };
                if !ok {
                    return Err(GraphError::ConflictingCode { u, v });
                }
            }
        }
        Ok(())
    }
}

/// Bijection on `0..n`, stored as the forward map old id -> new id.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Permutation {
    forward: Vec<usize>,
}

impl Permutation {
    pub fn new(forward: Vec<usize>) -> Result<Permutation, GraphError> {
        let n = forward.len();
        let mut seen = vec![false; n];
        for &x in &forward {
            if x >= n || seen[x] {
                return Err(GraphError::NotAPermutation);
            }
            seen[x] = true;
        }
        Ok(Permutation { forward })
    }

    pub fn identity(n: usize) -> Permutation {
        Permutation { forward: (0..n).collect() }
    }

    /// Builds the permutation that places `order[k]` at new position `k`.
    pub fn from_order(order: &[usize]) -> Result<Permutation, GraphError> {
        let n = order.len();
        let mut forward = vec![usize::MAX; n];
        for (new, &old) in order.iter().enumerate() {
            if old >= n || forward[old] != usize::MAX {
                return Err(GraphError::NotAPermutation);
            }
            forward[old] = new;
        }
        Ok(Permutation { forward })
    }

    #[inline]
    pub fn apply(&self, v: usize) -> usize {
        self.forward[v]
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.forward.len()];
        for (old, &new) in self.forward.iter().enumerate() {
            inv[new] = old;
        }
        Permutation { forward: inv }
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        Permutation { forward: self.forward.iter().map(|&x| other.apply(x)).collect() }
    }

    /// Old vertex ids listed in their new order.
    pub fn order(&self) -> Vec<usize> {
        self.inverse().forward
    }
}
