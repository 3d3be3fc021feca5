//! Bound jumping: once a dead-end is suspected, stop incremental improvement
//! and instead probe target sizes above the incumbent, then bisect between the
//! best reachable and the smallest unreachable target.

use alloc::vec::Vec;

use crate::classes::Domains;
use crate::control::Control;
use crate::error::SolveError;
use crate::graph::Graph;
use crate::heuristics::deadend::{DeadEndMonitor, DeadEndPolicy};
use crate::recursive::{check_inputs, probe, run, NoObserver, Probe, Pruning};
use crate::result::{Mapping, SearchStats, SolveResult, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Jump {
    /// Next target is the lower bound plus one.
    PlusOne,
    /// Next target is twice the lower bound.
    Doubling,
}

/// One probe and the bracket it left behind.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProbeRecord {
    pub goal: usize,
    pub reachable: bool,
    pub lower: usize,
    pub upper: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JumpOutcome {
    pub result: SolveResult,
    pub probes: Vec<ProbeRecord>,
}

/// Exact optimum starting from a known mapping `incumbent`.
pub fn bound_jump_search<C: Control + ?Sized>(
    g: &Graph,
    h: &Graph,
    incumbent: &Mapping,
    jump: Jump,
    control: &C,
) -> Result<JumpOutcome, SolveError> {
    check_inputs(g, h)?;
    let mut stats = SearchStats::default();
    let mut witness = incumbent.clone();
    let mut lower = witness.len();
    let mut upper = Domains::initial(g, h).bound(0).max(lower);
    let mut bisecting = false;
    let mut status = Status::Optimal;
    let mut probes = Vec::new();
    while lower < upper {
        let goal = if bisecting {
            (lower + upper).div_ceil(2)
        } else {
            match jump {
                Jump::PlusOne => lower + 1,
                Jump::Doubling => (lower * 2).max(lower + 1),
            }
            .min(upper)
        };
        let reachable = match probe(g, h, goal, control, &mut stats)? {
            Probe::Reached(m) => {
                lower = m.len();
                witness = m;
                true
            }
            Probe::Unreachable => {
                upper = goal - 1;
                bisecting = true;
                false
            }
            Probe::Interrupted(i, m) => {
                if m.len() > witness.len() {
                    witness = m;
                }
                status = i.into();
                break;
            }
        };
        probes.push(ProbeRecord { goal, reachable, lower, upper });
    }
    Ok(JumpOutcome {
        result: SolveResult { mapping: witness, status, stats, elapsed: control.elapsed(), seed: None },
        probes,
    })
}

/// Ordinary search watched by a dead-end monitor; on a suspected dead-end the
/// remaining work is handed to [`bound_jump_search`] from the incumbent.
pub fn solve_with_bound_jump<C: Control + ?Sized>(
    g: &Graph,
    h: &Graph,
    policy: DeadEndPolicy,
    jump: Jump,
    control: &C,
) -> Result<SolveResult, SolveError> {
    check_inputs(g, h)?;
    let monitor = DeadEndMonitor::new(policy);
    let out = run(g, h, Pruning::Incumbent, Mapping::new(), Some(monitor), control, &mut NoObserver);
    if !out.dead_end {
        return Ok(SolveResult {
            mapping: out.best,
            status: out.interrupted.map_or(Status::Optimal, Status::from),
            stats: out.stats,
            elapsed: control.elapsed(),
            seed: None,
        });
    }
    let mut jumped = bound_jump_search(g, h, &out.best, jump, control)?.result;
    let mut stats = out.stats;
    stats.absorb(&jumped.stats);
    jumped.stats = stats;
    Ok(jumped)
}
