//! Smatch: F-score over matched AMR triples under the best variable
//! mapping, searched by restart hill climbing.
//!
//! Both graphs become (instance, attribute, relation) triples. Instance
//! triples pair a variable with its concept; attribute triples cover
//! literal leaves plus a TOP marker on the root; relation triples connect
//! two variables. Hill climbing moves one variable mapping at a time
//! (remap or swap) from several seeded starts plus one greedy
//! concept-matching start.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::amr::{AmrGraph, NodeId};
use crate::metrics::Prf;

#[derive(Debug, Clone)]
pub struct SmatchResult {
    /// Best mapping found: pairs of (variable index in a, variable index
    /// in b), in a's variable order.
    pub mapping: Vec<(usize, usize)>,
    pub matched_triples: usize,
    pub triples_a: usize,
    pub triples_b: usize,
    pub prf: Prf,
    pub restarts_used: usize,
}

/// Triple view of one graph. Variables are indexed densely; literal
/// labels stay as strings.
struct Triples {
    /// concept label per variable.
    instances: Vec<String>,
    /// (relation, variable, constant) triples.
    attributes: Vec<(String, usize, String)>,
    /// (relation, variable, variable) triples.
    relations: Vec<(String, usize, usize)>,
}

impl Triples {
    fn total(&self) -> usize {
        self.instances.len() + self.attributes.len() + self.relations.len()
    }
}

fn to_triples(g: &AmrGraph) -> Triples {
    let mut var_index: HashMap<NodeId, usize> = HashMap::new();
    let mut instances = Vec::new();
    for (n, concept) in g.nodes.iter().enumerate() {
        if !concept.is_literal() {
            var_index.insert(n, instances.len());
            instances.push(concept.label.clone());
        }
    }
    let mut attributes = Vec::new();
    let mut relations = Vec::new();
    if let Some(&root) = var_index.get(&g.root) {
        attributes.push(("TOP".to_string(), root, "top".to_string()));
    }
    for e in &g.edges {
        let src = var_index[&e.source];
        match var_index.get(&e.target) {
            Some(&tgt) => relations.push((e.label.clone(), src, tgt)),
            None => attributes.push((e.label.clone(), src, g.nodes[e.target].label.clone())),
        }
    }
    Triples {
        instances,
        attributes,
        relations,
    }
}

/// Matched triple count under a (partial) injective mapping a -> b.
fn matched(a: &Triples, b: &Triples, mapping: &[Option<usize>]) -> usize {
    let mut total = 0;
    for (va, concept) in a.instances.iter().enumerate() {
        if let Some(vb) = mapping[va] {
            if &b.instances[vb] == concept {
                total += 1;
            }
        }
    }
    // Attribute and relation triples are multisets; clip duplicates.
    let mut b_attr: HashMap<(&str, usize, &str), usize> = HashMap::new();
    for (rel, v, c) in &b.attributes {
        *b_attr.entry((rel, *v, c)).or_insert(0) += 1;
    }
    for (rel, va, c) in &a.attributes {
        if let Some(vb) = mapping[*va] {
            if let Some(count) = b_attr.get_mut(&(rel.as_str(), vb, c.as_str())) {
                if *count > 0 {
                    *count -= 1;
                    total += 1;
                }
            }
        }
    }
    let mut b_rel: HashMap<(&str, usize, usize), usize> = HashMap::new();
    for (rel, v, w) in &b.relations {
        *b_rel.entry((rel, *v, *w)).or_insert(0) += 1;
    }
    for (rel, va, wa) in &a.relations {
        if let (Some(vb), Some(wb)) = (mapping[*va], mapping[*wa]) {
            if let Some(count) = b_rel.get_mut(&(rel.as_str(), vb, wb)) {
                if *count > 0 {
                    *count -= 1;
                    total += 1;
                }
            }
        }
    }
    total
}

/// Greedy start: map each variable of `a` (in order) to the first free
/// variable of `b` with the same concept, then fill leftovers in order.
/// On identical graphs this yields the identity mapping.
fn greedy_start(a: &Triples, b: &Triples) -> Vec<Option<usize>> {
    let mut used = vec![false; b.instances.len()];
    let mut mapping = vec![None; a.instances.len()];
    for (va, concept) in a.instances.iter().enumerate() {
        if let Some(vb) = (0..b.instances.len())
            .find(|&vb| !used[vb] && &b.instances[vb] == concept)
        {
            mapping[va] = Some(vb);
            used[vb] = true;
        }
    }
    for slot in mapping.iter_mut() {
        if slot.is_none() {
            if let Some(vb) = (0..b.instances.len()).find(|&vb| !used[vb]) {
                *slot = Some(vb);
                used[vb] = true;
            }
        }
    }
    mapping
}

fn random_start(a: &Triples, b: &Triples, rng: &mut ChaCha8Rng) -> Vec<Option<usize>> {
    let mut targets: Vec<usize> = (0..b.instances.len()).collect();
    targets.shuffle(rng);
    (0..a.instances.len())
        .map(|va| targets.get(va).copied())
        .collect()
}

/// Best-improvement hill climbing: either remap one variable to a free
/// target or swap two variables' targets.
fn climb(a: &Triples, b: &Triples, mapping: &mut Vec<Option<usize>>) -> usize {
    let mut current = matched(a, b, mapping);
    loop {
        let mut best_gain = 0usize;
        let mut best_move: Option<(usize, Option<usize>)> = None; // (va, new target)
        let mut best_swap: Option<(usize, usize)> = None;
        let used: Vec<bool> = {
            let mut u = vec![false; b.instances.len()];
            for m in mapping.iter().flatten() {
                u[*m] = true;
            }
            u
        };
        for va in 0..mapping.len() {
            let old = mapping[va];
            for vb in 0..b.instances.len() {
                if used[vb] && old != Some(vb) {
                    continue;
                }
                mapping[va] = Some(vb);
                let score = matched(a, b, mapping);
                mapping[va] = old;
                if score > current + best_gain {
                    best_gain = score - current;
                    best_move = Some((va, Some(vb)));
                    best_swap = None;
                }
            }
        }
        for i in 0..mapping.len() {
            for j in (i + 1)..mapping.len() {
                mapping.swap(i, j);
                let score = matched(a, b, mapping);
                mapping.swap(i, j);
                if score > current + best_gain {
                    best_gain = score - current;
                    best_move = None;
                    best_swap = Some((i, j));
                }
            }
        }
        if best_gain == 0 {
            return current;
        }
        if let Some((va, tgt)) = best_move {
            mapping[va] = tgt;
        } else if let Some((i, j)) = best_swap {
            mapping.swap(i, j);
        }
        current += best_gain;
    }
}

/// Smatch score between two graphs: hill-climbed best variable mapping
/// from `restarts` random seeded starts plus one greedy start.
pub fn smatch(a: &AmrGraph, b: &AmrGraph, restarts: usize, seed: u64) -> SmatchResult {
    let restarts = restarts.max(1);
    let ta = to_triples(a);
    let tb = to_triples(b);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best_mapping = greedy_start(&ta, &tb);
    let mut best = climb(&ta, &tb, &mut best_mapping);
    for _ in 0..restarts {
        let mut mapping = random_start(&ta, &tb, &mut rng);
        let score = climb(&ta, &tb, &mut mapping);
        if score > best {
            best = score;
            best_mapping = mapping;
        }
    }
    let prf = Prf::from_counts(best as f64, ta.total() as f64, tb.total() as f64);
    SmatchResult {
        mapping: best_mapping
            .iter()
            .enumerate()
            .filter_map(|(va, vb)| vb.map(|vb| (va, vb)))
            .collect(),
        matched_triples: best,
        triples_a: ta.total(),
        triples_b: tb.total(),
        prf,
        restarts_used: restarts,
    }
}

/// Exhaustive oracle over all injective mappings; factorial, only for
/// graphs with few variables. Exposed for tests and the acceptance suite.
pub fn smatch_exhaustive(a: &AmrGraph, b: &AmrGraph) -> Prf {
    let ta = to_triples(a);
    let tb = to_triples(b);
    let (small, large, swapped) = if ta.instances.len() <= tb.instances.len() {
        (&ta, &tb, false)
    } else {
        (&tb, &ta, true)
    };
    assert!(small.instances.len() <= 7, "exhaustive smatch guard");
    let n = small.instances.len();
    let m = large.instances.len();
    let mut best = 0usize;
    let mut mapping: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; m];
    fn rec(
        i: usize,
        n: usize,
        m: usize,
        mapping: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        small: &Triples,
        large: &Triples,
        best: &mut usize,
    ) {
        if i == n {
            *best = (*best).max(matched(small, large, mapping));
            return;
        }
        for vb in 0..m {
            if used[vb] {
                continue;
            }
            used[vb] = true;
            mapping[i] = Some(vb);
            rec(i + 1, n, m, mapping, used, small, large, best);
            mapping[i] = None;
            used[vb] = false;
        }
    }
    rec(0, n, m, &mut mapping, &mut used, small, large, &mut best);
    let (pa, pb) = if swapped {
        (tb.total(), ta.total())
    } else {
        (ta.total(), tb.total())
    };
    Prf::from_counts(best as f64, pa as f64, pb as f64)
}
