//! Initial vertex orderings. Each produces a [`Permutation`]; the engines run
//! on the permuted graphs and [`solve_ordered`] maps the result back.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{Graph, Permutation};
use crate::result::{Mapping, SolveResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OrderStrategy {
    DegreeDesc,
    ComponentsThenDegree,
    BlockTriangular,
}

impl OrderStrategy {
    pub fn permutation(self, g: &Graph) -> Permutation {
        match self {
            OrderStrategy::DegreeDesc => order_by_degree(g),
            OrderStrategy::ComponentsThenDegree => order_by_components(g),
            OrderStrategy::BlockTriangular => order_block_triangular(g),
        }
    }
}

fn sort_by_degree(vertices: &mut [usize], degree: &[usize]) {
    vertices.sort_by(|&a, &b| degree[b].cmp(&degree[a]).then(a.cmp(&b)));
}

/// Non-increasing (total) degree, ties by original id.
pub fn order_by_degree(g: &Graph) -> Permutation {
    let degree = g.degrees();
    let mut order: Vec<usize> = (0..g.n()).collect();
    sort_by_degree(&mut order, &degree);
    Permutation::from_order(&order).expect("sorted ids form a permutation")
}

/// Connected components concatenated, larger components first (ties by
/// smallest vertex), each ordered internally by degree.
pub fn order_by_components(g: &Graph) -> Permutation {
    let degree = g.degrees();
    let mut comps = g.connected_components();
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let mut order = Vec::with_capacity(g.n());
    for mut comp in comps {
        sort_by_degree(&mut comp, &degree);
        order.extend(comp);
    }
    Permutation::from_order(&order).expect("components partition the vertices")
}

/// Column order in the spirit of Hellerman-Rarick: repeatedly take the
/// active column meeting the most shortest active rows (lowest id on ties)
/// and move it to the border, until no active row has a nonzero left.
/// Columns never chosen follow in id order.
pub fn order_block_triangular(g: &Graph) -> Permutation {
    let n = g.n();
    let mut col_active = vec![true; n];
    let mut row_len: Vec<usize> = (0..n).map(|r| g.row(r).iter().filter(|&&c| c != 0).count()).collect();
    let mut order = Vec::with_capacity(n);
    let mut shortest = Vec::with_capacity(n);
    while let Some(min_len) = row_len.iter().copied().filter(|&l| l > 0).min() {
        shortest.clear();
        shortest.extend((0..n).filter(|&r| row_len[r] == min_len));
        let mut pick: Option<(usize, usize)> = None;
        for c in (0..n).filter(|&c| col_active[c]) {
            let hits = shortest.iter().filter(|&&r| g.adjacent(r, c)).count();
            if hits > 0 && pick.is_none_or(|(_, best)| hits > best) {
                pick = Some((c, hits));
            }
        }
        let (c, _) = pick.expect("a shortest row has an active nonzero");
        col_active[c] = false;
        order.push(c);
        for (r, len) in row_len.iter_mut().enumerate() {
            if g.adjacent(r, c) {
                *len -= 1;
            }
        }
    }
    order.extend((0..n).filter(|&c| col_active[c]));
    Permutation::from_order(&order).expect("each column placed once")
}

/// Runs `solve` on both graphs reordered by `strategy` and translates the
/// mapping back to the original vertex ids.
pub fn solve_ordered<E>(
    g: &Graph,
    h: &Graph,
    strategy: OrderStrategy,
    solve: impl FnOnce(&Graph, &Graph) -> Result<SolveResult, E>,
) -> Result<SolveResult, E> {
    let pg = strategy.permutation(g);
    let ph = strategy.permutation(h);
    let gp = g.permute(&pg).expect("permutation sized from the graph");
    let hp = h.permute(&ph).expect("permutation sized from the graph");
    let mut result = solve(&gp, &hp)?;
    let (ig, ih) = (pg.inverse(), ph.inverse());
    result.mapping = Mapping::from_pairs(result.mapping.iter().map(|&(v, u)| (ig.apply(v), ih.apply(u))).collect());
    Ok(result)
}
