//! Randomised restarts that keep the search exact.
//!
//! Every node of the search tree is addressed by its position key: the list
//! of child indices taken from the root, where the children of a node are its
//! right candidates in ascending order followed by the branch leaving the
//! branching vertex unmatched. Keys are independent of the visiting order, so
//! explored subtrees can be recorded as half-open key intervals
//! ([`VisitedRanges`]) that survive restarts. A pass that is restarted keeps
//! what it finished; the next pass skips it and opens with a seeded random
//! descent through unexplored children. The run ends once the interval set
//! covers the whole key space.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::Bound;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classes::{filter_classes, pick_max_degree, select_class_in, Bidomain, Domains};
use crate::control::{Control, Interrupt};
use crate::error::SolveError;
use crate::graph::Graph;
use crate::heuristics::deadend::{DeadEndMonitor, DeadEndPolicy};
use crate::recursive::check_inputs;
use crate::result::{Mapping, SearchStats, SolveResult, Status};

pub type PositionKey = Vec<u32>;

/// Upper end of an interval; `None` is past every key.
type End = Option<PositionKey>;

fn cmp_bound(a: &End, b: &End) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Greater,
        (Some(_), None) => Ordering::Less,
        (Some(x), Some(y)) => x.cmp(y),
    }
}

/// First key after every key of the subtree rooted at `key`.
fn subtree_end(key: &[u32]) -> End {
    let (last, prefix) = key.split_last()?;
    let mut end = prefix.to_vec();
    end.push(last + 1);
    Some(end)
}

/// Explored parts of the search tree as disjoint, non-adjacent intervals
/// `[start, end)` of position keys in lexicographic (preorder) order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VisitedRanges {
    ranges: BTreeMap<PositionKey, End>,
}

impl VisitedRanges {
    pub fn new() -> VisitedRanges {
        VisitedRanges::default()
    }

    /// Marks the subtree rooted at `key` explored and merges touching intervals.
    pub fn insert_subtree(&mut self, key: &[u32]) {
        let mut start = key.to_vec();
        let mut end = subtree_end(key);
        if let Some((ps, pe)) = self.ranges.range(..=start.clone()).next_back() {
            if cmp_bound(pe, &Some(start.clone())) != Ordering::Less {
                start = ps.clone();
                if cmp_bound(pe, &end) == Ordering::Greater {
                    end = pe.clone();
                }
            }
        }
        let absorbed: Vec<PositionKey> = {
            let mut out = Vec::new();
            let mut reach = end.clone();
            for (s, e) in self.ranges.range(start.clone()..) {
                if cmp_bound(&Some(s.clone()), &reach) == Ordering::Greater {
                    break;
                }
                if cmp_bound(e, &reach) == Ordering::Greater {
                    reach = e.clone();
                }
                out.push(s.clone());
            }
            end = reach;
            out
        };
        for s in absorbed {
            self.ranges.remove(&s);
        }
        self.ranges.insert(start, end);
    }

    /// Whether every key of the subtree rooted at `key` is covered.
    pub fn contains_subtree(&self, key: &[u32]) -> bool {
        match self.ranges.range::<[u32], _>((Bound::Unbounded, Bound::Included(key))).next_back() {
            Some((_, e)) => cmp_bound(e, &subtree_end(key)) != Ordering::Less,
            None => false,
        }
    }

    /// Whether the whole tree (every key) has been explored.
    pub fn is_complete(&self) -> bool {
        self.contains_subtree(&[])
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// Intervals as `(start, end)`; `None` marks an unbounded end.
    pub fn iter(&self) -> impl Iterator<Item = (&PositionKey, Option<&PositionKey>)> {
        self.ranges.iter().map(|(s, e)| (s, e.as_ref()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RestartConfig {
    pub seed: u64,
    /// When to restart; `None` never restarts.
    pub policy: Option<DeadEndPolicy>,
}

impl RestartConfig {
    /// Restart whenever the recursion count doubles since the last
    /// improvement (or the last restart).
    pub fn doubling(seed: u64) -> RestartConfig {
        RestartConfig { seed, policy: Some(DeadEndPolicy::Relative(1.0)) }
    }

    pub fn never(seed: u64) -> RestartConfig {
        RestartConfig { seed, policy: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestartReport {
    pub result: SolveResult,
    pub visited: VisitedRanges,
    pub passes: u64,
}

enum Flow {
    Done,
    Restart,
    Stop(Interrupt),
}

struct RestartSearch<'a, C: Control + ?Sized> {
    g: &'a Graph,
    h: &'a Graph,
    degree: Vec<usize>,
    control: &'a C,
    left: Vec<u32>,
    right: Vec<u32>,
    current: Mapping,
    best: Mapping,
    stats: SearchStats,
    visited: VisitedRanges,
    monitor: Option<DeadEndMonitor>,
    rng: ChaCha8Rng,
    randomize: bool,
    key: PositionKey,
}

impl<C: Control + ?Sized> RestartSearch<'_, C> {
    fn finish(&mut self) -> Flow {
        self.visited.insert_subtree(&self.key);
        self.randomize = false;
        Flow::Done
    }

    fn node(&mut self, mut classes: Vec<Bidomain>) -> Flow {
        self.stats.recursions += 1;
        if let Some(i) = self.control.interrupted() {
            return Flow::Stop(i);
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
        if self.monitor.as_ref().is_some_and(|m| m.suspect()) {
            return Flow::Restart;
        }
        let bound = self.current.len() + classes.iter().map(Bidomain::min_side).sum::<usize>();
        if bound <= self.best.len().max(self.control.external_best()) {
            return self.finish();
        }
        let Some(ci) = select_class_in(&self.left, &classes) else {
            return self.finish();
        };
        let c = classes[ci];
        let pos = pick_max_degree(self.left[c.l..c.l + c.left_len].iter().map(|&x| x as usize), &self.degree).unwrap();
        let v_slot = c.l + c.left_len - 1;
        self.left.swap(c.l + pos, v_slot);
        let v = self.left[v_slot] as usize;
        classes[ci].left_len -= 1;
        let mut candidates: Vec<u32> = self.right[c.r..c.r + c.right_len].to_vec();
        candidates.sort_unstable();

        let children = candidates.len() + 1;
        let mut order: Vec<usize> = (0..children).collect();
        if self.randomize {
            let untried: Vec<usize> = (0..children)
                .filter(|&i| {
                    self.key.push(i as u32);
                    let seen = self.visited.contains_subtree(&self.key);
                    self.key.pop();
                    !seen
                })
                .collect();
            if !untried.is_empty() {
                let first = untried[self.rng.random_range(0..untried.len())];
                order.retain(|&i| i != first);
                order.insert(0, first);
            }
        }

        for child in order {
            self.key.push(child as u32);
            if self.visited.contains_subtree(&self.key) {
                self.key.pop();
                continue;
            }
            let flow = if child < candidates.len() {
                let w = candidates[child];
                let mut with_pair = classes.clone();
                let cc = &mut with_pair[ci];
                let idx = (cc.r..cc.r + cc.right_len).find(|&i| self.right[i] == w).unwrap();
                self.right.swap(idx, cc.r + cc.right_len - 1);
                cc.right_len -= 1;
                let next = filter_classes(&mut self.left, &mut self.right, &with_pair, v, w as usize, self.g, self.h);
                self.current.push(v, w as usize);
                let flow = self.node(next);
                self.current.pop();
                flow
            } else {
                let mut without_v = classes.clone();
                if without_v[ci].left_len == 0 {
                    without_v.swap_remove(ci);
                }
                self.node(without_v)
            };
            self.key.pop();
            if !matches!(flow, Flow::Done) {
                return flow;
            }
        }
        self.finish()
    }
}

/// Exact search with seeded randomised restarts.
pub fn solve_with_restarts<C: Control + ?Sized>(
    g: &Graph,
    h: &Graph,
    config: RestartConfig,
    control: &C,
) -> Result<SolveResult, SolveError> {
    solve_with_restarts_report(g, h, config, control).map(|r| r.result)
}

/// [`solve_with_restarts`] that also returns the explored-range bookkeeping.
pub fn solve_with_restarts_report<C: Control + ?Sized>(
    g: &Graph,
    h: &Graph,
    config: RestartConfig,
    control: &C,
) -> Result<RestartReport, SolveError> {
    check_inputs(g, h)?;
    let mut s = RestartSearch {
        g,
        h,
        degree: g.degrees(),
        control,
        left: Vec::new(),
        right: Vec::new(),
        current: Mapping::new(),
        best: Mapping::new(),
        stats: SearchStats::default(),
        visited: VisitedRanges::new(),
        monitor: config.policy.map(DeadEndMonitor::new),
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        randomize: false,
        key: Vec::new(),
    };
    let mut passes = 0;
    let status = loop {
        passes += 1;
        let d = Domains::initial(g, h);
        s.left = d.left;
        s.right = d.right;
        s.key.clear();
        s.current = Mapping::new();
        match s.node(d.classes) {
            Flow::Done => break Status::Optimal,
            Flow::Stop(i) => break i.into(),
            Flow::Restart => {
                s.stats.restarts += 1;
                s.randomize = true;
                if let Some(m) = &mut s.monitor {
                    m.rearm();
                }
            }
        }
    };
    Ok(RestartReport {
        result: SolveResult {
            mapping: s.best,
            status,
            stats: s.stats,
            elapsed: control.elapsed(),
            seed: Some(config.seed),
        },
        visited: s.visited,
        passes,
    })
}
