//! Threads, clocks and files around `mcsplit-core`: the parallel engine,
//! portfolio racing, the benchmark harness and graph file formats.

pub mod bench;
pub mod deadline;
pub mod engine;
pub mod format;
pub mod parallel;
pub mod portfolio;

pub use deadline::Deadline;
pub use engine::{run_engine, EngineKind, EngineSpec, Heuristics};
pub use mcsplit_core as core;
pub use parallel::{solve_parallel, solve_parallel_report, ParallelConfig};
