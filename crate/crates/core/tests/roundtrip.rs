//! Property tests for the PENMAN parser/serializer pair.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use amr_summ::amr::{parse_penman, serialize_penman};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// parse(serialize(g)) is isomorphic to g for arbitrary valid graphs.
    #[test]
    fn round_trip_isomorphism(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_amr_graph(&mut rng, 20);
        let text = serialize_penman(&g).unwrap();
        let back = parse_penman(&text).unwrap();
        prop_assert!(g.isomorphic(&back), "not isomorphic after round trip:\n{text}");
    }

    /// Serialization is deterministic and every output prefix keeps
    /// open brackets >= closed brackets.
    #[test]
    fn serialization_deterministic_and_balanced(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_amr_graph(&mut rng, 20);
        let a = serialize_penman(&g).unwrap();
        let b = serialize_penman(&g).unwrap();
        prop_assert_eq!(&a, &b);
        let mut depth: i64 = 0;
        let mut in_string = false;
        let mut prev = '\0';
        for ch in a.chars() {
            match ch {
                '"' if prev != '\\' => in_string = !in_string,
                '(' if !in_string => depth += 1,
                ')' if !in_string => depth -= 1,
                _ => {}
            }
            prop_assert!(depth >= 0);
            prev = ch;
        }
        prop_assert_eq!(depth, 0);
    }

    /// The number of reentrant nodes survives a round trip.
    #[test]
    fn reentrancy_count_preserved(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_amr_graph(&mut rng, 20);
        let text = serialize_penman(&g).unwrap();
        let back = parse_penman(&text).unwrap();
        prop_assert_eq!(
            g.reentrant_nodes().len(),
            back.reentrant_nodes().len()
        );
    }

    /// Arbitrary input text never panics the parser; it either parses or
    /// reports a structured error.
    #[test]
    fn parser_is_total_on_garbage(text in ".{0,120}") {
        let _ = parse_penman(&text);
    }

    /// Bracket-ish garbage exercises deeper parser paths.
    #[test]
    fn parser_is_total_on_bracket_soup(text in r#"[():/"a-z0-9 \\-]{0,120}"#) {
        let _ = parse_penman(&text);
    }
}
