use mcsplit::core::Graph;
use mcsplit::format::{encode_graph, load_mivia, parse_graph, write_mivia, Format};
use proptest::prelude::*;

proptest! {
    #[test]
    fn mivia_bytes_are_stable(n in 1usize..80, d in 0.0..=1.0f64, seed in any::<u64>()) {
        let g = Graph::random(n, d, seed);
        let bytes = write_mivia(&g).unwrap();
        prop_assert_eq!(bytes.len(), 2 * (1 + n + 2 * g.edge_count()));
        let back = load_mivia(&bytes).unwrap();
        prop_assert_eq!(write_mivia(&back).unwrap(), bytes);
        prop_assert_eq!(back, g);
    }

    #[test]
    fn text_keeps_codes_and_labels(n in 1usize..30, d in 0.0..=1.0f64, seed in any::<u64>(), labels in 1u32..5) {
        let g = Graph::random_directed(n, d, seed).with_random_labels(labels, seed ^ 1);
        let bytes = encode_graph(&g, Format::Text).unwrap();
        prop_assert_eq!(parse_graph(&bytes, Format::Text).unwrap(), g);
    }

    #[test]
    fn garbage_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
        let _ = parse_graph(&bytes, Format::Mivia);
        let _ = parse_graph(&bytes, Format::Text);
    }
}
