use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("conflicting adjacency codes for pair ({u}, {v})")]
    ConflictingCode { u: usize, v: usize },
    #[error("edge code given for undirected pair ({u}, {v})")]
    CodeOnUndirected { u: usize, v: usize },
    #[error("expected {expected} vertex labels, found {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("permutation has {found} entries, graph has {expected} vertices")]
    PermutationSize { expected: usize, found: usize },
    #[error("not a bijection")]
    NotAPermutation,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("graphs must be of the same kind (directed or undirected)")]
    KindMismatch,
    #[error("graphs must be both labeled or both unlabeled")]
    LabelMismatch,
    #[error("graph has {n} vertices, the compact encoding supports at most {max}")]
    TooLarge { n: usize, max: usize },
    #[error("frame stack exceeded its capacity of {0} rows")]
    StackOverflow(usize),
    #[error("vertices ({v}, {u}) do not share a label class")]
    NotCoResident { v: usize, u: usize },
    #[error("mapping refers to vertex {vertex} outside 0..{n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("brute force refused: smaller graph has {n} vertices, ceiling is {max}")]
    OracleCeiling { n: usize, max: usize },
}
