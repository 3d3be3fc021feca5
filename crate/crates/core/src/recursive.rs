//! Sequential depth-first McSplit search.
//!
//! Each search node updates the incumbent, evaluates the bound, picks a class
//! and a left vertex `v`, then tries `v` against every right vertex of the
//! class in ascending order before exploring the branch where `v` stays
//! unmatched. That last branch is a loop rather than a call, so the native
//! stack only grows with the size of the current mapping.

use alloc::vec::Vec;

use crate::classes::{filter_classes, select_class_in, Bidomain, Domains, LabelClass};
use crate::control::{Control, Interrupt};
use crate::error::SolveError;
use crate::graph::Graph;
use crate::heuristics::deadend::DeadEndMonitor;
use crate::result::{Mapping, SearchStats, SolveResult, Status};

/// What a node prunes against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pruning {
    /// Prune when the bound cannot beat the incumbent.
    Incumbent,
    /// Prune when the bound falls below the goal; stop at the first mapping
    /// reaching it.
    Goal(usize),
    /// Explore the complete tree. Only useful for audits on tiny inputs.
    Off,
}

/// Snapshot handed to a [`SearchObserver`] at every node, after the incumbent
/// update and before the pruning decision.
pub struct NodeEvent<'a> {
    pub mapping: &'a [(usize, usize)],
    pub bound: usize,
    pub incumbent: usize,
    left: &'a [u32],
    right: &'a [u32],
    classes: &'a [Bidomain],
}

impl NodeEvent<'_> {
    pub fn classes(&self) -> Vec<LabelClass> {
        let d = Domains { left: self.left.to_vec(), right: self.right.to_vec(), classes: Vec::new() };
        self.classes.iter().filter(|c| c.live()).map(|c| d.view(c)).collect()
    }
}

pub trait SearchObserver {
    fn node(&mut self, _event: &NodeEvent<'_>) {}
}

/// Observer that ignores every event.
pub struct NoObserver;

impl SearchObserver for NoObserver {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Abort {
    Interrupted(Interrupt),
    GoalReached,
    DeadEnd,
}

pub fn check_inputs(g: &Graph, h: &Graph) -> Result<(), SolveError> {
    if g.kind() != h.kind() {
        return Err(SolveError::KindMismatch);
    }
    if g.is_labeled() != h.is_labeled() {
        return Err(SolveError::LabelMismatch);
    }
    Ok(())
}

struct Search<'a, C: Control + ?Sized, O: SearchObserver> {
    g: &'a Graph,
    h: &'a Graph,
    degree: Vec<usize>,
    control: &'a C,
    observer: &'a mut O,
    pruning: Pruning,
    left: Vec<u32>,
    right: Vec<u32>,
    current: Mapping,
    best: Mapping,
    stats: SearchStats,
    monitor: Option<DeadEndMonitor>,
    abort: Option<Abort>,
}

impl<C: Control + ?Sized, O: SearchObserver> Search<'_, C, O> {
    fn expand(&mut self, mut classes: Vec<Bidomain>) {
        loop {
            if self.abort.is_some() {
                return;
            }
            self.stats.recursions += 1;
            if let Some(i) = self.control.interrupted() {
                self.abort = Some(Abort::Interrupted(i));
                return;
            }
            if let Some(m) = &mut self.monitor {
                m.record_recursion();
            }
            if self.current.len() > self.best.len() {
                self.best = self.current.clone();
                self.stats.improvements += 1;
                self.control.offer(self.best.pairs());
                if let Some(m) = &mut self.monitor {
                    m.record_improvement();
                }
            }
            if let Pruning::Goal(t) = self.pruning {
                if self.best.len() >= t {
                    self.abort = Some(Abort::GoalReached);
                    return;
                }
            }
            if self.monitor.as_ref().is_some_and(|m| m.suspect()) {
                self.abort = Some(Abort::DeadEnd);
                return;
            }
            let bound = self.current.len() + classes.iter().map(Bidomain::min_side).sum::<usize>();
            self.observer.node(&NodeEvent {
                mapping: self.current.pairs(),
                bound,
                incumbent: self.best.len(),
                left: &self.left,
                right: &self.right,
                classes: &classes,
            });
            let pruned = match self.pruning {
                Pruning::Incumbent => bound <= self.best.len().max(self.control.external_best()),
                Pruning::Goal(t) => bound < t,
                Pruning::Off => false,
            };
            if pruned {
                return;
            }
            let Some(ci) = select_class_in(&self.left, &classes) else {
                return;
            };

            // take v out of its class
            let c = classes[ci];
            let pos = crate::classes::pick_max_degree(
                self.left[c.l..c.l + c.left_len].iter().map(|&x| x as usize),
                &self.degree,
            )
            .unwrap();
            let v_slot = c.l + c.left_len - 1;
            self.left.swap(c.l + pos, v_slot);
            let v = self.left[v_slot] as usize;
            classes[ci].left_len -= 1;

            // try v against each right vertex, smallest id first; the vertex in
            // use sits just past the shrunken right range
            classes[ci].right_len -= 1;
            let (r, rlen) = (c.r, classes[ci].right_len);
            let mut prev: Option<u32> = None;
            for _ in 0..=rlen {
                let idx = (r..=r + rlen)
                    .filter(|&i| prev.is_none_or(|p| self.right[i] > p))
                    .min_by_key(|&i| self.right[i])
                    .unwrap();
                let w = self.right[idx];
                self.right.swap(idx, r + rlen);
                let child = filter_classes(&mut self.left, &mut self.right, &classes, v, w as usize, self.g, self.h);
                self.current.push(v, w as usize);
                self.expand(child);
                self.current.pop();
                if self.abort.is_some() {
                    return;
                }
                prev = Some(w);
            }
            classes[ci].right_len += 1;

            // v stays unmatched
            if classes[ci].left_len == 0 {
                classes.swap_remove(ci);
            }
        }
    }
}

pub(crate) struct RunOutcome {
    pub best: Mapping,
    pub stats: SearchStats,
    pub interrupted: Option<Interrupt>,
    pub goal_reached: bool,
    pub dead_end: bool,
}

pub(crate) fn run<C: Control + ?Sized, O: SearchObserver>(
    g: &Graph,
    h: &Graph,
    pruning: Pruning,
    incumbent: Mapping,
    monitor: Option<DeadEndMonitor>,
    control: &C,
    observer: &mut O,
) -> RunOutcome {
    let domains = Domains::initial(g, h);
    let mut s = Search {
        g,
        h,
        degree: g.degrees(),
        control,
        observer,
        pruning,
        left: domains.left,
        right: domains.right,
        current: Mapping::new(),
        best: incumbent,
        stats: SearchStats::default(),
        monitor,
        abort: None,
    };
    s.expand(domains.classes);
    RunOutcome {
        best: s.best,
        stats: s.stats,
        interrupted: match s.abort {
            Some(Abort::Interrupted(i)) => Some(i),
            _ => None,
        },
        goal_reached: s.abort == Some(Abort::GoalReached),
        dead_end: s.abort == Some(Abort::DeadEnd),
    }
}

/// Options of [`solve_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub pruning: Pruning,
}

impl Default for SearchOptions {
    fn default() -> SearchOptions {
        SearchOptions { pruning: Pruning::Incumbent }
    }
}

/// Maximum common induced subgraph of `g` and `h`.
pub fn solve<C: Control + ?Sized>(g: &Graph, h: &Graph, control: &C) -> Result<SolveResult, SolveError> {
    solve_with(g, h, SearchOptions::default(), control, &mut NoObserver)
}

pub fn solve_with<C: Control + ?Sized, O: SearchObserver>(
    g: &Graph,
    h: &Graph,
    options: SearchOptions,
    control: &C,
    observer: &mut O,
) -> Result<SolveResult, SolveError> {
    check_inputs(g, h)?;
    let out = run(g, h, options.pruning, Mapping::new(), None, control, observer);
    Ok(SolveResult {
        mapping: out.best,
        status: out.interrupted.map_or(Status::Optimal, Status::from),
        stats: out.stats,
        elapsed: control.elapsed(),
        seed: None,
    })
}

/// Result of one goal-directed probe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Probe {
    /// A mapping of exactly the goal size.
    Reached(Mapping),
    /// Proven: no common induced subgraph of the goal size exists.
    Unreachable,
    /// Stopped early; carries the largest mapping seen.
    Interrupted(Interrupt, Mapping),
}

/// Searches for a mapping of size `goal`, pruning every branch whose bound
/// falls below it.
pub fn probe<C: Control + ?Sized>(
    g: &Graph,
    h: &Graph,
    goal: usize,
    control: &C,
    stats: &mut SearchStats,
) -> Result<Probe, SolveError> {
    check_inputs(g, h)?;
    let out = run(g, h, Pruning::Goal(goal), Mapping::new(), None, control, &mut NoObserver);
    stats.absorb(&out.stats);
    stats.probes += 1;
    Ok(if out.goal_reached {
        Probe::Reached(out.best)
    } else if let Some(i) = out.interrupted {
        Probe::Interrupted(i, out.best)
    } else {
        Probe::Unreachable
    })
}

/// Top-down solving: probes goal `|V_G|`, `|V_G| - 1`, ... (G the smaller
/// graph) and stops at the first goal that has a witness.
pub fn solve_goal_directed<C: Control + ?Sized>(g: &Graph, h: &Graph, control: &C) -> Result<SolveResult, SolveError> {
    check_inputs(g, h)?;
    let swapped = g.n() > h.n();
    let (small, large) = if swapped { (h, g) } else { (g, h) };
    let mut stats = SearchStats::default();
    let mut best = Mapping::new();
    let mut status = Status::Optimal;
    for goal in (0..=small.n()).rev() {
        stats.goal_iterations += 1;
        match probe(small, large, goal, control, &mut stats)? {
            Probe::Reached(m) => {
                best = m;
                break;
            }
            Probe::Unreachable => {}
            Probe::Interrupted(i, m) => {
                if m.len() > best.len() {
                    best = m;
                }
                status = i.into();
                break;
            }
        }
    }
    stats.probes = 0;
    Ok(SolveResult {
        mapping: if swapped { best.reversed() } else { best },
        status,
        stats,
        elapsed: control.elapsed(),
        seed: None,
    })
}
