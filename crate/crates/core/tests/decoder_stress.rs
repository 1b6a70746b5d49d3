//! Cross-checks of the exact decoder against the brute-force oracle under
//! every cost mode, on random graphs with cycles, parallel edges, and
//! varied budgets.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use amr_summ::decoder::{
    brute_force_decode, decode, objective, validate_selection, CostSign, CostSpec,
    DEFAULT_EXPANSION_CAP,
};

#[test]
fn decode_matches_brute_force_under_all_cost_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC057);
    for round in 0..150 {
        let (g, feats) = common::random_source_graph(&mut rng, 11);
        let budget = rng.gen_range(2..=5);
        let m = common::random_model(&mut rng, &feats, budget);
        let gold = common::random_selection(&mut rng, &g, budget);
        for sign in [CostSign::Plus, CostSign::Minus, CostSign::Only] {
            let spec = CostSpec { gold: &gold, sign };
            let d = decode(&g, &m, &feats, Some(&spec), DEFAULT_EXPANSION_CAP);
            assert!(d.optimal, "round {round}: unexpectedly hit the cap");
            validate_selection(&g, &d.selection, Some(budget)).unwrap();
            let bf = brute_force_decode(&g, &m, &feats, Some(&spec), 14).unwrap();
            let d_obj = objective(&d.selection, &g, &m, &feats, Some(&spec));
            let bf_obj = objective(&bf.selection, &g, &m, &feats, Some(&spec));
            assert_eq!(
                d_obj, bf_obj,
                "round {round} sign {sign:?}: {d_obj} vs {bf_obj}"
            );
            // Tie-break agreement: both sides return the same selection,
            // not merely the same score.
            assert_eq!(
                d.selection, bf.selection,
                "round {round} sign {sign:?}: tie-break disagreement"
            );
        }
    }
}

#[test]
fn expansion_cap_still_returns_a_valid_selection() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xCA9);
    for _ in 0..50 {
        let (g, feats) = common::random_source_graph(&mut rng, 12);
        let m = common::random_model(&mut rng, &feats, 4);
        let d = decode(&g, &m, &feats, None, 3);
        assert!(!d.optimal || d.expansions <= 3);
        validate_selection(&g, &d.selection, Some(4)).unwrap();
    }
}
