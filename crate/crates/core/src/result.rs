use core::time::Duration;

use alloc::vec::Vec;

use crate::control::Interrupt;

/// Ordered list of matched `(vertex of G, vertex of H)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Mapping(Vec<(usize, usize)>);

impl Mapping {
    pub fn new() -> Mapping {
        Mapping(Vec::new())
    }

    pub fn from_pairs(pairs: Vec<(usize, usize)>) -> Mapping {
        Mapping(pairs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn push(&mut self, v: usize, u: usize) {
        self.0.push((v, u));
    }

    pub fn pop(&mut self) -> Option<(usize, usize)> {
        self.0.pop()
    }

    pub fn truncate(&mut self, len: usize) {
        self.0.truncate(len);
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, usize)> {
        self.0.iter()
    }

    /// The same mapping seen from `H` to `G`.
    pub fn reversed(&self) -> Mapping {
        Mapping(self.0.iter().map(|&(v, u)| (u, v)).collect())
    }

    /// Pairs sorted by the `G` vertex; used for order-insensitive comparisons.
    pub fn canonical(&self) -> Vec<(usize, usize)> {
        let mut pairs = self.0.clone();
        pairs.sort_unstable();
        pairs
    }

    pub fn into_pairs(self) -> Vec<(usize, usize)> {
        self.0
    }
}

impl From<Vec<(usize, usize)>> for Mapping {
    fn from(pairs: Vec<(usize, usize)>) -> Mapping {
        Mapping(pairs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Status {
    Optimal,
    Timeout,
    Cancelled,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Timeout => "timeout",
            Status::Cancelled => "cancelled",
        }
    }
}

impl From<Interrupt> for Status {
    fn from(i: Interrupt) -> Status {
        match i {
            Interrupt::Timeout => Status::Timeout,
            Interrupt::Cancelled => Status::Cancelled,
        }
    }
}

/// Counters reported by the engines. Fields an engine does not use stay zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchStats {
    /// Search nodes visited (calls of the recursive procedure or their
    /// iterative equivalent).
    pub recursions: u64,
    /// Incumbent improvements.
    pub improvements: u64,
    /// Goal sizes attempted by goal-directed search.
    pub goal_iterations: u64,
    /// Goal-directed probes issued by bound jumping.
    pub probes: u64,
    pub restarts: u64,
    /// Largest frame-stack height (iterative engine).
    pub max_stack_rows: u64,
    /// Right-length restorations performed (iterative engine).
    pub restorations: u64,
    /// Restorations that found an inconsistent length; always zero for a
    /// correct engine.
    pub restoration_violations: u64,
}

impl SearchStats {
    pub fn absorb(&mut self, other: &SearchStats) {
        self.recursions += other.recursions;
        self.improvements += other.improvements;
        self.goal_iterations += other.goal_iterations;
        self.probes += other.probes;
        self.restarts += other.restarts;
        self.max_stack_rows = self.max_stack_rows.max(other.max_stack_rows);
        self.restorations += other.restorations;
        self.restoration_violations += other.restoration_violations;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveResult {
    pub mapping: Mapping,
    pub status: Status,
    pub stats: SearchStats,
    pub elapsed: Duration,
    /// Seed of the run's random generator, when the engine uses one.
    pub seed: Option<u64>,
}

impl SolveResult {
    pub fn size(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// Copy with the wall-clock field zeroed, for run-to-run comparisons.
    pub fn without_timing(&self) -> SolveResult {
        SolveResult { elapsed: Duration::ZERO, ..self.clone() }
    }
}
