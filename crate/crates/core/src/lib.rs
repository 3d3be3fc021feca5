//! Maximum common induced subgraph search built on label-class partitioning.
//!
//! Everything here needs only `alloc`. Time limits, threads and file formats
//! live in the `mcsplit` companion crate; engines learn about deadlines and
//! cancellation through the [`Control`] trait, which they poll once per node.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classes;
pub mod control;
pub mod error;
pub mod graph;
pub mod heuristics;
pub mod iterative;
pub mod oracle;
pub mod recursive;
pub mod result;

pub use classes::{
    compute_bound, filter_classes, initial_classes, pick_max_degree, refine, select_class_in, select_label_class,
    select_vertex, Bidomain, Domains, LabelClass,
};
pub use control::{CancelFlag, Control, Interrupt, NodeLimit, Unlimited};
pub use error::{GraphError, SolveError};
pub use graph::{Edge, EdgeCode, Graph, GraphKind, Label, Permutation};
pub use iterative::{solve_iterative, ClassSelection, IterativeConfig};
pub use recursive::{check_inputs, probe, solve, solve_goal_directed, solve_with, Probe, Pruning, SearchOptions};
pub use result::{Mapping, SearchStats, SolveResult, Status};
