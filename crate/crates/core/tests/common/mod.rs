//! Shared generators and helpers for the integration and acceptance
//! suites. Everything is seeded and deterministic.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use amr_summ::amr::{AmrGraph, Concept, ConceptKind};
use amr_summ::decoder::{validate_selection, Model, Selection};
use amr_summ::features::{FeatureVector, GraphFeatures};
use amr_summ::source_graph::{SourceEdge, SourceGraph, SourceNode, SNT_ROOT_LABEL};

const WORDS: &[&str] = &[
    "warhead", "country", "treaty", "program", "fuel", "reactor", "talk", "official", "border",
    "sanction",
];
const FRAMES: &[&str] = &[
    "state-01", "possess-01", "agree-01", "build-01", "halt-01", "inspect-01", "sign-02",
];
const ROLES: &[&str] = &[
    "ARG0", "ARG1", "ARG2", "mod", "time", "location", "op1", "op2", "manner",
];
const LITERALS: &[&str] = &["Japan", "Korea", "2002", "IAEA", "New York", "a \"quoted\" name"];

/// Random rooted acyclic AMR graph with optional reentrancies and literal
/// leaves. Nodes keep topological index order, so extra earlier-to-later
/// edges never create cycles.
pub fn random_amr_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> AmrGraph {
    let n = rng.gen_range(1..=max_nodes.max(1));
    // Pick parents first so literal status can be limited to leaves.
    let mut parent: Vec<usize> = vec![0; n];
    for (i, p) in parent.iter_mut().enumerate().skip(1) {
        *p = rng.gen_range(0..i);
    }
    let mut has_child = vec![false; n];
    for &p in parent.iter().skip(1) {
        has_child[p] = true;
    }
    // Literal leaves may not serve as parents of anything.
    let mut is_literal = vec![false; n];
    for i in 1..n {
        if !has_child[i] && rng.gen_bool(0.3) {
            is_literal[i] = true;
        }
    }
    let with_variables = rng.gen_bool(0.5);
    let mut g = AmrGraph::new(0);
    for i in 0..n {
        let concept = if is_literal[i] {
            Concept::literal(LITERALS[rng.gen_range(0..LITERALS.len())])
        } else {
            let label = if rng.gen_bool(0.5) {
                FRAMES[rng.gen_range(0..FRAMES.len())]
            } else {
                WORDS[rng.gen_range(0..WORDS.len())]
            };
            let var = format!("x{i}");
            Concept::new(with_variables.then_some(var.as_str()), label)
        };
        g.add_node(concept);
    }
    for i in 1..n {
        let role = ROLES[rng.gen_range(0..ROLES.len())];
        g.add_edge(parent[i], role, i);
    }
    // Reentrancies: extra forward edges between non-literals.
    let extra = rng.gen_range(0..=(n / 4));
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u < v && !is_literal[u] && !is_literal[v] {
            let role = ROLES[rng.gen_range(0..ROLES.len())];
            g.add_edge(u, role, v);
        }
    }
    debug_assert!(g.validate().is_ok());
    g
}

/// Random source graph for decoder stress tests: a connected backbone
/// under ROOT plus extra cross edges (parallel labels allowed, occasional
/// back edges so directed cycles occur). Every item carries one unique
/// feature plus a shared bucket feature.
pub fn random_source_graph(
    rng: &mut ChaCha8Rng,
    max_content_nodes: usize,
) -> (SourceGraph, GraphFeatures) {
    let n = rng.gen_range(3..=max_content_nodes.max(3));
    let mut nodes = vec![SourceNode {
        concept: Concept {
            variable: None,
            label: "ROOT".into(),
            kind: ConceptKind::Keyword,
        },
        provenance: BTreeSet::new(),
        merge_key: "<ROOT>".into(),
    }];
    for i in 1..=n {
        let mut prov = BTreeSet::new();
        prov.insert((0usize, i));
        nodes.push(SourceNode {
            concept: Concept::new(None, &format!("c{i}")),
            provenance: prov,
            merge_key: format!("c{i}"),
        });
    }
    let mut edges: Vec<SourceEdge> = Vec::new();
    let n_sentence_roots = rng.gen_range(1..=2.min(n));
    for r in 0..n_sentence_roots {
        edges.push(SourceEdge {
            label: SNT_ROOT_LABEL.into(),
            source: 0,
            target: 1 + r,
            provenance: [r].into_iter().collect(),
        });
    }
    for v in (1 + n_sentence_roots)..=n {
        let u = rng.gen_range(1..v);
        edges.push(SourceEdge {
            label: format!("r{}", rng.gen_range(0..4)),
            source: u,
            target: v,
            provenance: [0usize].into_iter().collect(),
        });
    }
    let extra = rng.gen_range(0..=n / 2 + 1);
    for _ in 0..extra {
        let u = rng.gen_range(1..=n);
        let v = rng.gen_range(1..=n);
        if u == v {
            continue;
        }
        let label = format!("r{}", rng.gen_range(0..4));
        if edges
            .iter()
            .any(|e| e.source == u && e.target == v && e.label == label)
        {
            continue;
        }
        edges.push(SourceEdge {
            label,
            source: u,
            target: v,
            provenance: [0usize].into_iter().collect(),
        });
    }
    let g = SourceGraph {
        nodes,
        edges,
        root: 0,
        sentence_count: 1,
    };

    let mut node_feats = Vec::new();
    for i in 0..g.nodes.len() {
        let mut f = FeatureVector::new();
        if i != g.root {
            f.fire(format!("n{i}"));
            if rng.gen_bool(0.5) {
                f.fire(format!("shared{}", i % 3));
            }
        }
        node_feats.push(f);
    }
    let mut edge_feats = Vec::new();
    for (j, e) in g.edges.iter().enumerate() {
        let mut f = FeatureVector::new();
        if e.is_snt_root() {
            f.fire("is-snt-root-edge");
        } else {
            f.fire(format!("e{j}"));
            if rng.gen_bool(0.3) {
                f.fire(format!("eshared{}", j % 2));
            }
        }
        edge_feats.push(f);
    }
    (
        g,
        GraphFeatures {
            nodes: node_feats,
            edges: edge_feats,
        },
    )
}

/// Weights in [-1, 1] for every feature that appears in the graph.
pub fn random_model(rng: &mut ChaCha8Rng, feats: &GraphFeatures, budget: usize) -> Model {
    let mut m = Model::new(budget);
    for f in &feats.nodes {
        for name in f.iter() {
            m.node_weights
                .entry(name.to_string())
                .or_insert_with(|| rng.gen_range(-1.0..=1.0));
        }
    }
    for f in &feats.edges {
        for name in f.iter() {
            m.edge_weights
                .entry(name.to_string())
                .or_insert_with(|| rng.gen_range(-1.0..=1.0));
        }
    }
    m
}

/// Random valid selection grown edge by edge, used as a gold standard in
/// oracle tests.
pub fn random_selection(rng: &mut ChaCha8Rng, g: &SourceGraph, budget: usize) -> Selection {
    let mut sel = Selection::root_only(g);
    let target = rng.gen_range(0..=budget);
    while sel.content_node_count(g) < target {
        let frontier: Vec<usize> = g
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| sel.nodes.contains(&e.source) && !sel.nodes.contains(&e.target))
            .map(|(i, _)| i)
            .collect();
        if frontier.is_empty() {
            break;
        }
        let e = frontier[rng.gen_range(0..frontier.len())];
        sel.edges.insert(e);
        sel.nodes.insert(g.edges[e].target);
    }
    validate_selection(g, &sel, Some(budget)).expect("generated selection is valid");
    sel
}

/// Adjusted Rand index between two partitions given as label vectors.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let ka = a.iter().max().map(|&m| m + 1).unwrap_or(0);
    let kb = b.iter().max().map(|&m| m + 1).unwrap_or(0);
    let mut table = vec![vec![0usize; kb]; ka];
    for i in 0..n {
        table[a[i]][b[i]] += 1;
    }
    let choose2 = |x: usize| -> f64 { (x * x.saturating_sub(1)) as f64 / 2.0 };
    let sum_ij: f64 = table.iter().flatten().map(|&x| choose2(x)).sum();
    let sum_a: f64 = table.iter().map(|row| choose2(row.iter().sum())).sum();
    let sum_b: f64 = (0..kb)
        .map(|j| choose2(table.iter().map(|row| row[j]).sum()))
        .sum();
    let total = choose2(n);
    let expected = sum_a * sum_b / total;
    let max_index = (sum_a + sum_b) / 2.0;
    if (max_index - expected).abs() < 1e-15 {
        return 1.0;
    }
    (sum_ij - expected) / (max_index - expected)
}
