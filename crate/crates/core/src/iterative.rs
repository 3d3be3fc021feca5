//! Recursion-free McSplit over an explicit stack of eight-field frames.
//!
//! The stack is split into segments, one per search level, each opened by a
//! separator row whose fields all hold the sentinel value. A segment holds the
//! classes produced by one refinement; its frames point into two shared vertex
//! arrays that child refinements partition in place. The frame on top of a
//! segment is the one being branched on: its `left_selected` field says the
//! left vertex sits just past the shrunken left range, and `right_cursor`
//! counts how many right candidates it has been tried against. The candidate
//! in use sits just past the right range, so the next one is found as the
//! smallest id above it. Once every candidate has been tried the right length
//! goes back to `right_len_original` and the left vertex stays excluded, which
//! is the "left unmatched" branch of the recursive formulation.

use alloc::vec::Vec;
use core::fmt::Debug;

use crate::classes::{pick_max_degree, Domains, LabelClass};
use crate::control::{Control, Interrupt};
use crate::error::SolveError;
use crate::graph::Graph;
use crate::recursive::check_inputs;
use crate::result::{Mapping, SearchStats, SolveResult, Status};

/// Integer type of every frame field and stored vertex.
pub trait StackWord: Copy + Eq + Ord + Default + Debug {
    /// Reserved value; never a valid field.
    const SENTINEL: Self;
    /// Largest vertex count representable.
    const MAX_VERTICES: usize;
    fn from_usize(x: usize) -> Self;
    fn get(self) -> usize;
}

impl StackWord for u8 {
    const SENTINEL: u8 = u8::MAX;
    const MAX_VERTICES: usize = 254;
    #[inline]
    fn from_usize(x: usize) -> u8 {
        debug_assert!(x < 255);
        x as u8
    }
    #[inline]
    fn get(self) -> usize {
        self as usize
    }
}

impl StackWord for u32 {
    const SENTINEL: u32 = u32::MAX;
    const MAX_VERTICES: usize = u32::MAX as usize - 1;
    #[inline]
    fn from_usize(x: usize) -> u32 {
        x as u32
    }
    #[inline]
    fn get(self) -> usize {
        self as usize
    }
}

/// One stack row. With `u8` fields a row is eight bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(C)]
pub struct Frame<W> {
    pub left_start: W,
    pub right_start: W,
    pub left_len: W,
    pub right_len: W,
    pub adjacent: W,
    pub right_len_original: W,
    pub right_cursor: W,
    pub left_selected: W,
}

impl<W: StackWord> Frame<W> {
    pub fn separator() -> Frame<W> {
        let s = W::SENTINEL;
        Frame {
            left_start: s,
            right_start: s,
            left_len: s,
            right_len: s,
            adjacent: s,
            right_len_original: s,
            right_cursor: s,
            left_selected: s,
        }
    }

    fn class(l: usize, r: usize, left_len: usize, right_len: usize, adjacent: bool) -> Frame<W> {
        Frame {
            left_start: W::from_usize(l),
            right_start: W::from_usize(r),
            left_len: W::from_usize(left_len),
            right_len: W::from_usize(right_len),
            adjacent: W::from_usize(adjacent as usize),
            right_len_original: W::from_usize(right_len),
            right_cursor: W::from_usize(0),
            left_selected: W::SENTINEL,
        }
    }

    pub fn is_separator(&self) -> bool {
        self.left_start == W::SENTINEL
    }

    pub fn is_active(&self) -> bool {
        !self.is_separator() && self.left_selected != W::SENTINEL
    }

    pub fn is_live(&self) -> bool {
        !self.is_separator() && self.left_len.get() > 0 && self.right_len.get() > 0
    }

    fn min_side(&self) -> usize {
        if self.is_separator() {
            0
        } else {
            self.left_len.get().min(self.right_len.get())
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ClassSelection {
    /// Scan the current segment top to bottom for the best class.
    #[default]
    Backward,
    /// Take the topmost live class without comparing.
    TopOfStack,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterativeConfig {
    /// Use 32-bit fields instead of bytes, lifting the 254-vertex cap.
    pub wide: bool,
    /// Maximum number of stack rows; exceeding it is an error.
    pub stack_capacity: Option<usize>,
    pub selection: ClassSelection,
}

/// Frame stack plus the shared vertex arrays its frames index.
#[derive(Clone, Debug)]
pub struct FrameStack<W> {
    rows: Vec<Frame<W>>,
    left: Vec<W>,
    right: Vec<W>,
    /// Row index of every separator, bottom to top.
    separators: Vec<usize>,
}

impl<W: StackWord> FrameStack<W> {
    fn from_domains(d: &Domains) -> FrameStack<W> {
        let mut rows = Vec::with_capacity(d.classes.len() + 1);
        rows.push(Frame::separator());
        rows.extend(d.classes.iter().map(|c| Frame::class(c.l, c.r, c.left_len, c.right_len, c.adjacent)));
        FrameStack {
            rows,
            left: d.left.iter().map(|&x| W::from_usize(x as usize)).collect(),
            right: d.right.iter().map(|&x| W::from_usize(x as usize)).collect(),
            separators: alloc::vec![0],
        }
    }

    /// Single-segment stack holding `classes`.
    pub fn from_classes(classes: &[LabelClass]) -> FrameStack<W> {
        FrameStack::from_domains(&Domains::from_classes(classes))
    }

    pub fn rows(&self) -> &[Frame<W>] {
        &self.rows
    }

    pub fn class_at(&self, row: usize) -> LabelClass {
        let f = &self.rows[row];
        let (l, r) = (f.left_start.get(), f.right_start.get());
        LabelClass::new(
            self.left[l..l + f.left_len.get()].iter().map(|x| x.get()).collect(),
            self.right[r..r + f.right_len.get()].iter().map(|x| x.get()).collect(),
            f.adjacent.get() != 0,
        )
    }

    fn segment_start(&self) -> usize {
        *self.separators.last().expect("stack not empty") + 1
    }

    fn lowest_left(&self, f: &Frame<W>) -> usize {
        let l = f.left_start.get();
        self.left[l..l + f.left_len.get()].iter().map(|x| x.get()).min().unwrap_or(usize::MAX)
    }

    /// Picks the class to branch on in the top segment and swaps it to the top
    /// of the stack. Returns the row where the class was found, or `None`
    /// when the segment has no live class left.
    pub fn select_class_backward(&mut self, selection: ClassSelection) -> Option<usize> {
        let start = self.segment_start();
        let top = self.rows.len().checked_sub(1)?;
        if top < start {
            return None;
        }
        let mut pick: Option<(usize, (usize, usize, usize))> = None;
        for i in (start..=top).rev() {
            let f = self.rows[i];
            if !f.is_live() {
                continue;
            }
            if selection == ClassSelection::TopOfStack {
                pick = Some((i, (0, 0, 0)));
                break;
            }
            let rank = crate::classes::class_rank(f.left_len.get(), f.right_len.get(), self.lowest_left(&f));
            if pick.is_none_or(|(_, best)| rank < best) {
                pick = Some((i, rank));
            }
        }
        let (found, _) = pick?;
        self.rows.swap(found, top);
        Some(found)
    }

    fn bound(&self, matched: usize) -> usize {
        matched + self.rows[self.segment_start()..].iter().map(Frame::min_side).sum::<usize>()
    }
}

/// Current and best solutions as two parallel vertex rows.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CompactSolution<W> {
    pub g_row: Vec<W>,
    pub h_row: Vec<W>,
}

impl<W: StackWord> CompactSolution<W> {
    pub fn len(&self) -> usize {
        self.g_row.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g_row.is_empty()
    }

    pub fn to_mapping(&self) -> Mapping {
        Mapping::from_pairs(self.g_row.iter().zip(&self.h_row).map(|(v, u)| (v.get(), u.get())).collect())
    }
}

struct Engine<'a, W, C: Control + ?Sized> {
    g: &'a Graph,
    h: &'a Graph,
    degree: Vec<usize>,
    control: &'a C,
    config: IterativeConfig,
    stack: FrameStack<W>,
    current: CompactSolution<W>,
    best: CompactSolution<W>,
    stats: SearchStats,
}

enum Entry {
    Continue,
    Pruned,
    Stop(Interrupt),
}

impl<W: StackWord, C: Control + ?Sized> Engine<'_, W, C> {
    /// Work done on arriving at a search node: count, poll, incumbent, bound.
    fn enter_node(&mut self) -> Entry {
        self.stats.recursions += 1;
        if let Some(i) = self.control.interrupted() {
            return Entry::Stop(i);
        }
        if self.current.len() > self.best.len() {
            self.best = self.current.clone();
            self.stats.improvements += 1;
            self.control.offer(self.best.to_mapping().pairs());
        }
        let incumbent = self.best.len().max(self.control.external_best());
        if self.stack.bound(self.current.len()) <= incumbent {
            Entry::Pruned
        } else {
            Entry::Continue
        }
    }

    fn pop_segment(&mut self) {
        let sep = self.stack.separators.pop().expect("segment to pop");
        self.stack.rows.truncate(sep);
        if !self.stack.separators.is_empty() {
            self.current.g_row.pop();
            self.current.h_row.pop();
        }
    }

    fn push_row(&mut self, f: Frame<W>) -> Result<(), SolveError> {
        if let Some(cap) = self.config.stack_capacity {
            if self.stack.rows.len() >= cap {
                return Err(SolveError::StackOverflow(cap));
            }
        }
        self.stack.rows.push(f);
        self.stats.max_stack_rows = self.stats.max_stack_rows.max(self.stack.rows.len() as u64);
        Ok(())
    }

    /// Opens a child segment refining the current one by the pair `(v, w)`.
    fn push_child(&mut self, v: usize, w: usize) -> Result<(), SolveError> {
        let parent = self.stack.segment_start()..self.stack.rows.len();
        let child_sep = self.stack.rows.len();
        self.push_row(Frame::separator())?;
        self.stack.separators.push(child_sep);
        let last_code: u8 = if self.g.is_directed() { 3 } else { 1 };
        let (g_row, h_row) = (self.g.row(v), self.h.row(w));
        for i in parent {
            let f = self.stack.rows[i];
            if !f.is_live() {
                continue;
            }
            let (mut l, mut r) = (f.left_start.get(), f.right_start.get());
            let (l_end, r_end) = (l + f.left_len.get(), r + f.right_len.get());
            for code in 0..=last_code {
                let (nl, nr) = if code == last_code {
                    (l_end - l, r_end - r)
                } else {
                    (
                        partition(&mut self.stack.left[l..l_end], |x| g_row[x.get()] == code),
                        partition(&mut self.stack.right[r..r_end], |y| h_row[y.get()] == code),
                    )
                };
                if nl > 0 && nr > 0 {
                    self.push_row(Frame::class(l, r, nl, nr, code != 0))?;
                }
                l += nl;
                r += nr;
            }
        }
        self.current.g_row.push(W::from_usize(v));
        self.current.h_row.push(W::from_usize(w));
        Ok(())
    }

    fn run(&mut self) -> Result<Option<Interrupt>, SolveError> {
        match self.enter_node() {
            Entry::Stop(i) => return Ok(Some(i)),
            Entry::Pruned => self.pop_segment(),
            Entry::Continue => {}
        }
        while !self.stack.separators.is_empty() {
            let top = self.stack.rows.len() - 1;
            let f = self.stack.rows[top];
            if f.is_active() {
                let (l, r) = (f.left_start.get(), f.right_start.get());
                let original = f.right_len_original.get();
                let tried = f.right_cursor.get();
                if tried < original {
                    // next right candidate: smallest id above the one in use
                    let slot = r + original - 1;
                    let prev = (tried > 0).then(|| self.stack.right[slot]);
                    let idx = (r..=slot)
                        .filter(|&i| prev.is_none_or(|p| self.stack.right[i] > p))
                        .min_by_key(|&i| self.stack.right[i])
                        .expect("an untried candidate remains");
                    self.stack.right.swap(idx, slot);
                    let w = self.stack.right[slot].get();
                    let v = self.stack.left[l + f.left_selected.get()].get();
                    self.stack.rows[top].right_cursor = W::from_usize(tried + 1);
                    self.push_child(v, w)?;
                    match self.enter_node() {
                        Entry::Stop(i) => return Ok(Some(i)),
                        Entry::Pruned => self.pop_segment(),
                        Entry::Continue => {}
                    }
                } else {
                    // every candidate tried: restore and leave v unmatched
                    let row = &mut self.stack.rows[top];
                    self.stats.restorations += 1;
                    if row.right_len.get() + 1 != original || tried != original {
                        self.stats.restoration_violations += 1;
                    }
                    row.right_len = row.right_len_original;
                    row.right_cursor = W::from_usize(0);
                    row.left_selected = W::SENTINEL;
                    debug_assert_eq!(row.right_len, row.right_len_original);
                    match self.enter_node() {
                        Entry::Stop(i) => return Ok(Some(i)),
                        Entry::Pruned => self.pop_segment(),
                        Entry::Continue => {}
                    }
                }
                continue;
            }
            let Some(_) = self.stack.select_class_backward(self.config.selection) else {
                self.pop_segment();
                continue;
            };
            let row = &mut self.stack.rows[top];
            let l = row.left_start.get();
            let len = row.left_len.get();
            let pos = pick_max_degree(self.stack.left[l..l + len].iter().map(|x| x.get()), &self.degree)
                .expect("live class has a left vertex");
            self.stack.left.swap(l + pos, l + len - 1);
            row.left_len = W::from_usize(len - 1);
            row.left_selected = W::from_usize(len - 1);
            row.right_len = W::from_usize(row.right_len_original.get() - 1);
            row.right_cursor = W::from_usize(0);
        }
        Ok(None)
    }
}

#[inline]
fn partition<W: Copy>(seg: &mut [W], mut pred: impl FnMut(W) -> bool) -> usize {
    let mut k = 0;
    for i in 0..seg.len() {
        if pred(seg[i]) {
            seg.swap(i, k);
            k += 1;
        }
    }
    k
}

fn solve_with_word<W: StackWord, C: Control + ?Sized>(
    g: &Graph,
    h: &Graph,
    config: IterativeConfig,
    control: &C,
) -> Result<SolveResult, SolveError> {
    for n in [g.n(), h.n()] {
        if n > W::MAX_VERTICES {
            return Err(SolveError::TooLarge { n, max: W::MAX_VERTICES });
        }
    }
    let domains = Domains::initial(g, h);
    let mut engine = Engine::<W, C> {
        g,
        h,
        degree: g.degrees(),
        control,
        config,
        stack: FrameStack::from_domains(&domains),
        current: CompactSolution::default(),
        best: CompactSolution::default(),
        stats: SearchStats::default(),
    };
    if let Some(cap) = config.stack_capacity {
        if engine.stack.rows.len() > cap {
            return Err(SolveError::StackOverflow(cap));
        }
    }
    engine.stats.max_stack_rows = engine.stack.rows.len() as u64;
    let interrupted = engine.run()?;
    Ok(SolveResult {
        mapping: engine.best.to_mapping(),
        status: interrupted.map_or(Status::Optimal, Status::from),
        stats: engine.stats,
        elapsed: control.elapsed(),
        seed: None,
    })
}

/// Maximum common induced subgraph without recursion. Byte-wide frames cap
/// both graphs at 254 vertices unless `config.wide` is set.
pub fn solve_iterative<C: Control + ?Sized>(
    g: &Graph,
    h: &Graph,
    config: IterativeConfig,
    control: &C,
) -> Result<SolveResult, SolveError> {
    check_inputs(g, h)?;
    if config.wide {
        solve_with_word::<u32, C>(g, h, config, control)
    } else {
        solve_with_word::<u8, C>(g, h, config, control)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::Unlimited;
    use crate::graph::GraphKind;
    use alloc::vec;

    #[test]
    fn byte_frames_are_eight_bytes() {
        assert_eq!(core::mem::size_of::<Frame<u8>>(), 8);
    }

    #[test]
    fn backward_selection_single_class() {
        let mut s = FrameStack::<u8>::from_classes(&[LabelClass::new(vec![0, 1], vec![0, 1], false)]);
        assert_eq!(s.select_class_backward(ClassSelection::Backward), Some(1));
        assert_eq!(s.rows().len(), 2);
    }

    #[test]
    fn backward_selection_prefers_small_class_and_swaps_it_up() {
        let big = LabelClass::new(vec![0, 1, 2, 3], vec![0, 1, 2, 3], false);
        let small = LabelClass::new(vec![4], vec![4], true);
        let mut s = FrameStack::<u8>::from_classes(&[small.clone(), big.clone()]);
        assert_eq!(s.select_class_backward(ClassSelection::Backward), Some(1));
        assert_eq!(s.class_at(2), small);
        assert_eq!(s.class_at(1), big);
    }

    #[test]
    fn backward_selection_no_live_class() {
        let mut s = FrameStack::<u8>::from_classes(&[]);
        assert_eq!(s.select_class_backward(ClassSelection::Backward), None);
    }

    #[test]
    fn cap_is_enforced() {
        let g = Graph::empty(255, GraphKind::Undirected);
        let small = Graph::empty(3, GraphKind::Undirected);
        assert_eq!(
            solve_iterative(&g, &small, IterativeConfig::default(), &Unlimited),
            Err(SolveError::TooLarge { n: 255, max: 254 })
        );
        let wide = IterativeConfig { wide: true, ..Default::default() };
        assert_eq!(solve_iterative(&g, &small, wide, &Unlimited).unwrap().size(), 3);
    }

    #[test]
    fn stack_capacity_overflow() {
        let g = Graph::random(8, 0.5, 2);
        let tight = IterativeConfig { stack_capacity: Some(3), ..Default::default() };
        assert_eq!(solve_iterative(&g, &g, tight, &Unlimited), Err(SolveError::StackOverflow(3)));
    }
}
