//! Label classes ("bidomains") and the operations every engine builds on:
//! initial partition, the bound, class and vertex selection, and refinement
//! after a new pair is matched.
//!
//! Engines work on [`Domains`], which keeps the unmatched vertices of both
//! graphs in two flat arrays and describes each class as a pair of ranges.
//! Refinement partitions those ranges in place, so a child search node shares
//! the arrays of its parent: the *set* of vertices inside every parent range is
//! preserved, only their order changes. [`LabelClass`] is the owned,
//! order-insensitive view used at API boundaries and in tests.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::SolveError;
use crate::graph::Graph;

/// Owned view of one label class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelClass {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    /// Set when the class lies on an adjacent side of the most recent split.
    pub adjacent: bool,
}

impl LabelClass {
    pub fn new(mut left: Vec<usize>, mut right: Vec<usize>, adjacent: bool) -> LabelClass {
        left.sort_unstable();
        right.sort_unstable();
        LabelClass { left, right, adjacent }
    }

    pub fn sizes(&self) -> (usize, usize) {
        (self.left.len(), self.right.len())
    }
}

/// Range-based class over the shared vertex arrays of [`Domains`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Bidomain {
    pub l: usize,
    pub r: usize,
    pub left_len: usize,
    pub right_len: usize,
    pub adjacent: bool,
}

impl Bidomain {
    #[inline]
    pub fn live(&self) -> bool {
        self.left_len > 0 && self.right_len > 0
    }

    #[inline]
    pub fn min_side(&self) -> usize {
        self.left_len.min(self.right_len)
    }
}

/// Selection order shared by every engine: smallest `max(|left|, |right|)`,
/// then smallest `min(|left|, |right|)`, then lowest left vertex id.
#[inline]
pub fn class_rank(left_len: usize, right_len: usize, lowest_left: usize) -> (usize, usize, usize) {
    (left_len.max(right_len), left_len.min(right_len), lowest_left)
}

/// Index of the preferred vertex in `candidates`: highest degree, then lowest id.
pub fn pick_max_degree(candidates: impl Iterator<Item = usize>, degree: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, usize, usize)> = None;
    for (pos, v) in candidates.enumerate() {
        let better = match best {
            None => true,
            Some((_, bv, bd)) => degree[v] > bd || (degree[v] == bd && v < bv),
        };
        if better {
            best = Some((pos, v, degree[v]));
        }
    }
    best.map(|(pos, _, _)| pos)
}

/// Moves every element satisfying `pred` to the front; returns how many did.
#[inline]
fn partition(seg: &mut [u32], mut pred: impl FnMut(u32) -> bool) -> usize {
    let mut k = 0;
    for i in 0..seg.len() {
        if pred(seg[i]) {
            seg.swap(i, k);
            k += 1;
        }
    }
    k
}

/// Refines `classes` after matching `v` (of `g`) with `w` (of `h`). Both must
/// already be outside every range. Sub-classes are emitted in code order
/// (non-adjacent, then forward, backward, both); empty-sided ones are dropped.
pub fn filter_classes(
    left: &mut [u32],
    right: &mut [u32],
    classes: &[Bidomain],
    v: usize,
    w: usize,
    g: &Graph,
    h: &Graph,
) -> Vec<Bidomain> {
    let g_row = g.row(v);
    let h_row = h.row(w);
    let last_code: u8 = if g.is_directed() { 3 } else { 1 };
    let mut out = Vec::with_capacity(classes.len() * 2);
    for c in classes {
        if !c.live() {
            continue;
        }
        let (mut l, mut r) = (c.l, c.r);
        let (l_end, r_end) = (c.l + c.left_len, c.r + c.right_len);
        for code in 0..=last_code {
            let (nl, nr) = if code == last_code {
                (l_end - l, r_end - r)
            } else {
                (
                    partition(&mut left[l..l_end], |x| g_row[x as usize] == code),
                    partition(&mut right[r..r_end], |y| h_row[y as usize] == code),
                )
            };
            if nl > 0 && nr > 0 {
                out.push(Bidomain { l, r, left_len: nl, right_len: nr, adjacent: code != 0 });
            }
            l += nl;
            r += nr;
        }
    }
    out
}

/// Flat class storage: two vertex arrays and the ranges describing each class.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Domains {
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    pub classes: Vec<Bidomain>,
}

impl Domains {
    /// One class holding every vertex when unlabeled; otherwise one class per
    /// vertex label occurring in both graphs, in ascending label order.
    pub fn initial(g: &Graph, h: &Graph) -> Domains {
        match (g.labels(), h.labels()) {
            (Some(gl), Some(hl)) => {
                let mut by_label: BTreeMap<u32, (Vec<u32>, Vec<u32>)> = BTreeMap::new();
                for (v, &lab) in gl.iter().enumerate() {
                    by_label.entry(lab).or_default().0.push(v as u32);
                }
                for (u, &lab) in hl.iter().enumerate() {
                    by_label.entry(lab).or_default().1.push(u as u32);
                }
                let mut d = Domains { left: Vec::new(), right: Vec::new(), classes: Vec::new() };
                for (_, (l, r)) in by_label {
                    if l.is_empty() || r.is_empty() {
                        continue;
                    }
                    d.classes.push(Bidomain {
                        l: d.left.len(),
                        r: d.right.len(),
                        left_len: l.len(),
                        right_len: r.len(),
                        adjacent: false,
                    });
                    d.left.extend(l);
                    d.right.extend(r);
                }
                d
            }
            _ => {
                let (n, m) = (g.n(), h.n());
                let classes = if n > 0 && m > 0 {
                    alloc::vec![Bidomain { l: 0, r: 0, left_len: n, right_len: m, adjacent: false }]
                } else {
                    Vec::new()
                };
                Domains { left: (0..n as u32).collect(), right: (0..m as u32).collect(), classes }
            }
        }
    }

    pub fn from_classes(classes: &[LabelClass]) -> Domains {
        let mut d = Domains { left: Vec::new(), right: Vec::new(), classes: Vec::new() };
        for c in classes {
            d.classes.push(Bidomain {
                l: d.left.len(),
                r: d.right.len(),
                left_len: c.left.len(),
                right_len: c.right.len(),
                adjacent: c.adjacent,
            });
            d.left.extend(c.left.iter().map(|&x| x as u32));
            d.right.extend(c.right.iter().map(|&x| x as u32));
        }
        d
    }

    pub fn to_classes(&self) -> Vec<LabelClass> {
        self.classes.iter().filter(|c| c.live()).map(|c| self.view(c)).collect()
    }

    pub fn view(&self, c: &Bidomain) -> LabelClass {
        LabelClass::new(
            self.left[c.l..c.l + c.left_len].iter().map(|&x| x as usize).collect(),
            self.right[c.r..c.r + c.right_len].iter().map(|&x| x as usize).collect(),
            c.adjacent,
        )
    }

    pub fn bound(&self, matched: usize) -> usize {
        matched + self.classes.iter().map(Bidomain::min_side).sum::<usize>()
    }

    pub fn select_class(&self) -> Option<usize> {
        select_class_in(&self.left, &self.classes)
    }

    /// Position (offset inside the class range) of the preferred left vertex.
    pub fn select_vertex(&self, class: usize, degree: &[usize]) -> usize {
        let c = &self.classes[class];
        pick_max_degree(self.left[c.l..c.l + c.left_len].iter().map(|&x| x as usize), degree)
            .expect("selected class has a left vertex")
    }

    /// Swaps the left vertex at `pos` past the end of its class and shrinks
    /// the class; returns the vertex.
    pub fn remove_left(&mut self, class: usize, pos: usize) -> usize {
        let c = &mut self.classes[class];
        let last = c.l + c.left_len - 1;
        self.left.swap(c.l + pos, last);
        c.left_len -= 1;
        self.left[last] as usize
    }

    /// Same as [`Domains::remove_left`] for the right side, locating `u` by value.
    pub fn remove_right_vertex(&mut self, class: usize, u: usize) -> bool {
        let c = &mut self.classes[class];
        let seg = &self.right[c.r..c.r + c.right_len];
        match seg.iter().position(|&x| x as usize == u) {
            Some(pos) => {
                let last = c.r + c.right_len - 1;
                self.right.swap(c.r + pos, last);
                c.right_len -= 1;
                true
            }
            None => false,
        }
    }

    /// Right vertices of a class in ascending order: the candidate loop.
    pub fn right_candidates(&self, class: usize) -> Vec<usize> {
        let c = &self.classes[class];
        let mut out: Vec<usize> = self.right[c.r..c.r + c.right_len].iter().map(|&x| x as usize).collect();
        out.sort_unstable();
        out
    }

    /// Drops the class if its left side became empty.
    pub fn drop_if_exhausted(&mut self, class: usize) {
        if self.classes[class].left_len == 0 {
            self.classes.swap_remove(class);
        }
    }

    /// Child state for the pair `(v, w)`; `v` and `w` must have been removed
    /// from their ranges already.
    pub fn child(&mut self, v: usize, w: usize, g: &Graph, h: &Graph) -> Vec<Bidomain> {
        let classes = core::mem::take(&mut self.classes);
        let out = filter_classes(&mut self.left, &mut self.right, &classes, v, w, g, h);
        self.classes = classes;
        out
    }
}

pub fn select_class_in(left: &[u32], classes: &[Bidomain]) -> Option<usize> {
    classes
        .iter()
        .enumerate()
        .filter(|(_, c)| c.live())
        .min_by_key(|(_, c)| {
            let lowest = left[c.l..c.l + c.left_len].iter().min().copied().unwrap_or(u32::MAX);
            class_rank(c.left_len, c.right_len, lowest as usize)
        })
        .map(|(i, _)| i)
}

/// Classes present before anything is matched.
pub fn initial_classes(g: &Graph, h: &Graph) -> Vec<LabelClass> {
    Domains::initial(g, h).to_classes()
}

/// `m_size` plus, for every class, the smaller of its two sides.
pub fn compute_bound(m_size: usize, classes: &[LabelClass]) -> usize {
    m_size + classes.iter().map(|c| c.left.len().min(c.right.len())).sum::<usize>()
}

/// Index of the class to branch on, or `None` for an empty list.
pub fn select_label_class(classes: &[LabelClass]) -> Option<usize> {
    classes
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.left.is_empty() && !c.right.is_empty())
        .min_by_key(|(_, c)| {
            let lowest = c.left.iter().min().copied().unwrap_or(usize::MAX);
            class_rank(c.left.len(), c.right.len(), lowest)
        })
        .map(|(i, _)| i)
}

/// Left vertex of maximum degree (total degree when directed), lowest id on ties.
pub fn select_vertex(class: &LabelClass, g: &Graph) -> Option<usize> {
    let degree = g.degrees();
    pick_max_degree(class.left.iter().copied(), &degree).map(|pos| class.left[pos])
}

/// Classes after matching `v` with `u`. Both must sit in the same class.
pub fn refine(classes: &[LabelClass], v: usize, u: usize, g: &Graph, h: &Graph) -> Result<Vec<LabelClass>, SolveError> {
    let home = classes
        .iter()
        .position(|c| c.left.contains(&v) && c.right.contains(&u))
        .ok_or(SolveError::NotCoResident { v, u })?;
    let mut d = Domains::from_classes(classes);
    let pos = d.left[d.classes[home].l..].iter().position(|&x| x as usize == v).unwrap();
    d.remove_left(home, pos);
    d.remove_right_vertex(home, u);
    let child = d.child(v, u, g, h);
    d.classes = child;
    Ok(d.to_classes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;
    use alloc::vec;

    fn lc(left: &[usize], right: &[usize]) -> LabelClass {
        LabelClass::new(left.to_vec(), right.to_vec(), false)
    }

    #[test]
    fn initial_unlabeled_single_class() {
        let g = Graph::empty(4, GraphKind::Undirected);
        let classes = initial_classes(&g, &g);
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].sizes(), (4, 4));
    }

    #[test]
    fn initial_labeled_intersection() {
        // labels a=0, b=1, c=2
        let mut g = Graph::empty(4, GraphKind::Undirected);
        g.set_labels(Some(vec![0, 0, 1, 1])).unwrap();
        let mut h = Graph::empty(4, GraphKind::Undirected);
        h.set_labels(Some(vec![0, 2, 2, 2])).unwrap();
        let classes = initial_classes(&g, &h);
        assert_eq!(classes, vec![lc(&[0, 1], &[0])]);

        let mut disjoint = Graph::empty(2, GraphKind::Undirected);
        disjoint.set_labels(Some(vec![7, 7])).unwrap();
        assert!(initial_classes(&g, &disjoint).is_empty());
    }

    #[test]
    fn bound_examples() {
        assert_eq!(compute_bound(0, &[lc(&[0, 1, 2, 3], &[0, 1, 2, 3])]), 4);
        assert_eq!(compute_bound(2, &[lc(&[0, 1], &[0]), lc(&[2], &[1, 2])]), 4);
        assert_eq!(compute_bound(3, &[]), 3);
    }

    #[test]
    fn class_selection() {
        let classes = [lc(&[0, 1, 2], &[0, 1, 2, 3, 4]), lc(&[3, 4], &[5, 6])];
        assert_eq!(select_label_class(&classes), Some(1));
        let tie = [lc(&[5], &[0, 1, 2, 3]), lc(&[1, 2, 3, 4], &[4])];
        assert_eq!(select_label_class(&tie), Some(1));
        assert_eq!(select_label_class(&[lc(&[0], &[0])]), Some(0));
        assert_eq!(select_label_class(&[]), None);
    }

    #[test]
    fn vertex_selection() {
        let p3 = Graph::from_edges(3, GraphKind::Undirected, [(0, 1), (1, 2)], None).unwrap();
        assert_eq!(select_vertex(&lc(&[0, 1, 2], &[0]), &p3), Some(1));
        let c4 = Graph::from_edges(4, GraphKind::Undirected, [(0, 1), (1, 2), (2, 3), (3, 0)], None).unwrap();
        assert_eq!(select_vertex(&lc(&[3, 1, 2], &[0]), &c4), Some(1));
        let star = Graph::from_edges(4, GraphKind::Undirected, [(2, 0), (2, 1), (2, 3)], None).unwrap();
        assert_eq!(select_vertex(&lc(&[0, 1, 2, 3], &[0]), &star), Some(2));
    }

    #[test]
    fn refine_errors_and_trivial_case() {
        let g = Graph::from_edges(1, GraphKind::Undirected, Vec::<(usize, usize)>::new(), None).unwrap();
        let classes = initial_classes(&g, &g);
        assert_eq!(refine(&classes, 0, 0, &g, &g).unwrap(), vec![]);
        assert_eq!(refine(&[lc(&[0], &[1])], 0, 0, &g, &g), Err(SolveError::NotCoResident { v: 0, u: 0 }));
    }

    #[test]
    fn directed_split_is_four_way() {
        use crate::graph::{Edge, EdgeCode};
        // vertex 0 relates to 1,2,3,4 with codes none, fwd, bwd, both
        let edges = [
            Edge::with_code(0, 2, EdgeCode::Forward),
            Edge::with_code(0, 3, EdgeCode::Backward),
            Edge::with_code(0, 4, EdgeCode::Both),
        ];
        let g = Graph::from_edges(5, GraphKind::Directed, edges, None).unwrap();
        let classes = refine(&initial_classes(&g, &g), 0, 0, &g, &g).unwrap();
        assert_eq!(
            classes,
            vec![
                LabelClass::new(vec![1], vec![1], false),
                LabelClass::new(vec![2], vec![2], true),
                LabelClass::new(vec![3], vec![3], true),
                LabelClass::new(vec![4], vec![4], true),
            ]
        );
    }
}
