//! Search heuristics layered over the recursive engine.

pub mod deadend;
pub mod jump;
pub mod ordering;
pub mod restarts;

pub use deadend::{DeadEndMonitor, DeadEndPolicy, Verdict};
pub use jump::{bound_jump_search, solve_with_bound_jump, Jump, JumpOutcome, ProbeRecord};
pub use ordering::{solve_ordered, OrderStrategy};
pub use restarts::{solve_with_restarts, solve_with_restarts_report, RestartConfig, RestartReport, VisitedRanges};
