use mcsplit_core::heuristics::ordering::order_by_components;
use mcsplit_core::heuristics::OrderStrategy;
use mcsplit_core::oracle::{mcs_bruteforce, verify};
use mcsplit_core::{solve, Graph, Permutation, Unlimited};
use proptest::prelude::*;

fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n, 0.0..=1.0f64, any::<u64>(), any::<bool>()).prop_map(|(n, d, seed, directed)| {
        if directed {
            Graph::random_directed(n, d, seed)
        } else {
            Graph::random(n, d, seed)
        }
    })
}

fn same_kind_pair(max_n: usize) -> impl Strategy<Value = (Graph, Graph)> {
    (1..=max_n, 1..=max_n, 0.0..=1.0f64, any::<u64>(), any::<bool>()).prop_map(|(a, b, d, seed, directed)| {
        if directed {
            (Graph::random_directed(a, d, seed), Graph::random_directed(b, d, seed.wrapping_add(1)))
        } else {
            (Graph::random(a, d, seed), Graph::random(b, d, seed.wrapping_add(1)))
        }
    })
}

fn permutation(n: usize, seed: u64) -> Permutation {
    let mut order: Vec<usize> = (0..n).collect();
    let mut x = seed | 1;
    for i in (1..n).rev() {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        order.swap(i, (x % (i as u64 + 1)) as usize);
    }
    Permutation::new(order).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permute_round_trips(g in graph(12), seed in any::<u64>()) {
        let p = permutation(g.n(), seed);
        let back = g.permute(&p).unwrap().permute(&p.inverse()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn components_partition_the_vertices(g in graph(14)) {
        let mut all: Vec<usize> = g.connected_components().concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..g.n()).collect::<Vec<_>>());
        let order = order_by_components(&g).order();
        prop_assert_eq!(order.len(), g.n());
    }

    #[test]
    fn orderings_are_bijections(g in graph(14)) {
        for s in [OrderStrategy::DegreeDesc, OrderStrategy::ComponentsThenDegree, OrderStrategy::BlockTriangular] {
            let mut seen: Vec<usize> = s.permutation(&g).as_slice().to_vec();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..g.n()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn size_is_symmetric((g, h) in same_kind_pair(7)) {
        let a = solve(&g, &h, &Unlimited).unwrap();
        let b = solve(&h, &g, &Unlimited).unwrap();
        prop_assert_eq!(a.size(), b.size());
        prop_assert!(verify(&h, &g, &a.mapping.reversed()).unwrap());
        prop_assert_eq!(mcs_bruteforce(&g, &h).unwrap().size, mcs_bruteforce(&h, &g).unwrap().size);
    }

    #[test]
    fn size_ignores_relabeling((g, h) in same_kind_pair(7), seed in any::<u64>()) {
        let base = solve(&g, &h, &Unlimited).unwrap().size();
        let gp = g.permute(&permutation(g.n(), seed)).unwrap();
        let hp = h.permute(&permutation(h.n(), seed ^ 0x55)).unwrap();
        prop_assert_eq!(solve(&gp, &hp, &Unlimited).unwrap().size(), base);
        for s in [OrderStrategy::DegreeDesc, OrderStrategy::ComponentsThenDegree, OrderStrategy::BlockTriangular] {
            let r = mcsplit_core::heuristics::solve_ordered(&g, &h, s, |a, b| solve(a, b, &Unlimited)).unwrap();
            prop_assert_eq!(r.size(), base);
            prop_assert!(verify(&g, &h, &r.mapping).unwrap());
        }
    }

    #[test]
    fn self_match_is_total(g in graph(9)) {
        prop_assert_eq!(solve(&g, &g, &Unlimited).unwrap().size(), g.n());
    }
}
