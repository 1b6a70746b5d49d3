//! Randomized agreement between hill-climbing and exhaustive Smatch on
//! small graphs.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use amr_summ::metrics::{smatch, smatch_exhaustive};

#[test]
fn hill_climbing_never_exceeds_and_matches_exhaustive_on_small_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x57A7C4);
    let mut checked = 0usize;
    while checked < 60 {
        let a = common::random_amr_graph(&mut rng, 6);
        let b = common::random_amr_graph(&mut rng, 6);
        let vars = |g: &amr_summ::amr::AmrGraph| g.nodes.iter().filter(|n| !n.is_literal()).count();
        if vars(&a) > 6 || vars(&b) > 6 {
            continue;
        }
        let climbed = smatch(&a, &b, 4, checked as u64).prf;
        let exact = smatch_exhaustive(&a, &b);
        assert!(
            climbed.f1 <= exact.f1 + 1e-12,
            "hill climbing exceeded the exhaustive optimum"
        );
        assert_eq!(climbed.f1, exact.f1, "restart hill climbing missed the optimum");
        checked += 1;
    }
}
