//! Ground truth for tests: a mapping verifier and an exhaustive MCS search.
//! Nothing here shares code with the engines.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::SolveError;
use crate::graph::Graph;
use crate::result::Mapping;

/// Largest smaller-graph size [`mcs_bruteforce`] accepts.
pub const BRUTE_FORCE_CEILING: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub size: usize,
    pub witness: Mapping,
}

#[inline]
fn compatible(g: &Graph, h: &Graph, a: (usize, usize), b: (usize, usize)) -> bool {
    g.code(a.0, b.0) == h.code(a.1, b.1)
}

/// `true` iff `mapping` is injective on both sides, preserves adjacency and
/// non-adjacency (the exact code for directed graphs) and matches vertex labels.
pub fn verify(g: &Graph, h: &Graph, mapping: &Mapping) -> Result<bool, SolveError> {
    for &(v, u) in mapping.iter() {
        if v >= g.n() {
            return Err(SolveError::VertexOutOfRange { vertex: v, n: g.n() });
        }
        if u >= h.n() {
            return Err(SolveError::VertexOutOfRange { vertex: u, n: h.n() });
        }
    }
    if g.kind() != h.kind() {
        return Ok(false);
    }
    let mut used_g = vec![false; g.n()];
    let mut used_h = vec![false; h.n()];
    for &(v, u) in mapping.iter() {
        if used_g[v] || used_h[u] || g.label(v) != h.label(u) {
            return Ok(false);
        }
        used_g[v] = true;
        used_h[u] = true;
    }
    let pairs = mapping.pairs();
    for (i, &a) in pairs.iter().enumerate() {
        for &b in &pairs[i + 1..] {
            if !compatible(g, h, a, b) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

struct Enumerator<'a> {
    g: &'a Graph,
    h: &'a Graph,
    subset: Vec<usize>,
    image: Vec<usize>,
    used: Vec<bool>,
}

impl Enumerator<'_> {
    /// Extends `image` so that `subset[..image.len()]` maps consistently.
    fn assign(&mut self) -> bool {
        let i = self.image.len();
        if i == self.subset.len() {
            return true;
        }
        let v = self.subset[i];
        for u in 0..self.h.n() {
            if self.used[u] || self.g.label(v) != self.h.label(u) {
                continue;
            }
            let ok = (0..i).all(|j| compatible(self.g, self.h, (self.subset[j], self.image[j]), (v, u)));
            if !ok {
                continue;
            }
            self.used[u] = true;
            self.image.push(u);
            if self.assign() {
                return true;
            }
            self.image.pop();
            self.used[u] = false;
        }
        false
    }

    /// Tries every `k`-subset of `V_G` in lexicographic order.
    fn subsets(&mut self, k: usize, from: usize) -> bool {
        if self.subset.len() == k {
            return self.assign();
        }
        let need = k - self.subset.len();
        for v in from..=(self.g.n() - need) {
            self.subset.push(v);
            if self.subsets(k, v + 1) {
                return true;
            }
            self.subset.pop();
        }
        false
    }
}

/// Exact maximum common induced subgraph by exhaustion, largest size first.
pub fn mcs_bruteforce(g: &Graph, h: &Graph) -> Result<OracleResult, SolveError> {
    let smaller = g.n().min(h.n());
    if smaller > BRUTE_FORCE_CEILING {
        return Err(SolveError::OracleCeiling { n: smaller, max: BRUTE_FORCE_CEILING });
    }
    if g.kind() != h.kind() {
        return Err(SolveError::KindMismatch);
    }
    for k in (0..=smaller).rev() {
        let mut e = Enumerator { g, h, subset: Vec::new(), image: Vec::new(), used: vec![false; h.n()] };
        if e.subsets(k, 0) {
            let witness = Mapping::from_pairs(e.subset.into_iter().zip(e.image).collect());
            return Ok(OracleResult { size: k, witness });
        }
    }
    unreachable!("the empty mapping always exists")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::from_edges(n, GraphKind::Undirected, edges.iter().copied(), None).unwrap()
    }

    #[test]
    fn identity_verifies() {
        let g = Graph::random(7, 0.5, 11);
        let id = Mapping::from_pairs((0..7).map(|v| (v, v)).collect());
        assert_eq!(verify(&g, &g, &id), Ok(true));
    }

    #[test]
    fn edge_to_non_edge_fails() {
        let p2 = graph(2, &[(0, 1)]);
        let e2 = graph(2, &[]);
        assert_eq!(verify(&p2, &e2, &Mapping::from_pairs(vec![(0, 0), (1, 1)])), Ok(false));
        assert_eq!(verify(&p2, &p2, &Mapping::from_pairs(vec![(0, 0), (1, 0)])), Ok(false));
        assert!(verify(&p2, &p2, &Mapping::from_pairs(vec![(0, 2)])).is_err());
    }

    #[test]
    fn small_exact_values() {
        let k3 = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let c4 = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        // an induced subgraph of C4 on 3 vertices is a path, never a triangle
        assert_eq!(mcs_bruteforce(&k3, &c4).unwrap().size, 2);
        let p2 = graph(2, &[(0, 1)]);
        let p3 = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(mcs_bruteforce(&p2, &p3).unwrap().size, 2);
        let g = Graph::random(8, 0.4, 5);
        assert_eq!(mcs_bruteforce(&g, &g).unwrap().size, 8);
    }

    #[test]
    fn refuses_large_inputs() {
        let g = Graph::empty(11, GraphKind::Undirected);
        assert!(matches!(mcs_bruteforce(&g, &g), Err(SolveError::OracleCeiling { .. })));
    }
}
