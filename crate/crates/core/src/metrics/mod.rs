//! Evaluation: Smatch graph matching, node/edge precision/recall/F1
//! against gold summary graphs, ROUGE-style n-gram scores, and n-gram
//! abstractiveness.

mod rouge;
mod smatch;

pub use rouge::{abstractiveness, rouge_n, rouge_su4, RougeError};
pub use smatch::{smatch, smatch_exhaustive, SmatchResult};

use std::collections::HashMap;

use crate::amr::AmrGraph;
use crate::decoder::Selection;
use crate::source_graph::{collapse_entities, merge_key, SourceGraph};

/// Precision, recall, and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(matched: f64, predicted: f64, gold: f64) -> Prf {
        let precision = if predicted > 0.0 { matched / predicted } else { 0.0 };
        let recall = if gold > 0.0 { matched / gold } else { 0.0 };
        Prf::from_pr(precision, recall)
    }

    pub fn from_pr(precision: f64, recall: f64) -> Prf {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf { precision, recall, f1 }
    }

    pub const ZERO: Prf = Prf { precision: 0.0, recall: 0.0, f1: 0.0 };
}

fn clipped_overlap(a: &HashMap<String, usize>, b: &HashMap<String, usize>) -> usize {
    a.iter()
        .map(|(k, &c)| c.min(b.get(k).copied().unwrap_or(0)))
        .sum()
}

fn counts(items: impl Iterator<Item = String>) -> HashMap<String, usize> {
    let mut map = HashMap::new();
    for item in items {
        *map.entry(item).or_insert(0) += 1;
    }
    map
}

/// Node and edge multisets of a decoded selection, keyed the same way the
/// builder merges concepts. The synthetic ROOT and its connectivity edges
/// are structural and excluded.
fn selection_multisets(
    g: &SourceGraph,
    sel: &Selection,
) -> (HashMap<String, usize>, HashMap<String, usize>) {
    let nodes = counts(
        sel.nodes
            .iter()
            .filter(|&&n| n != g.root)
            .map(|&n| g.nodes[n].merge_key.clone()),
    );
    let edges = counts(sel.edges.iter().filter_map(|&e| {
        let edge = &g.edges[e];
        if edge.is_snt_root() {
            return None;
        }
        Some(format!(
            "{}\t{}\t{}",
            g.nodes[edge.source].merge_key, edge.label, g.nodes[edge.target].merge_key
        ))
    }));
    (nodes, edges)
}

/// Node and edge multisets of a reference graph after entity collapsing.
fn graph_multisets(g: &AmrGraph) -> (HashMap<String, usize>, HashMap<String, usize>) {
    let g = collapse_entities(g);
    let keys: Vec<String> = g.nodes.iter().map(merge_key).collect();
    let nodes = counts(keys.iter().cloned());
    let edges = counts(
        g.edges
            .iter()
            .map(|e| format!("{}\t{}\t{}", keys[e.source], e.label, keys[e.target])),
    );
    (nodes, edges)
}

/// How well a decoded selection matches a reference summary graph on
/// nodes (concept merge keys) and edges (key, relation, key triples).
pub fn node_edge_prf(g: &SourceGraph, sel: &Selection, gold: &AmrGraph) -> (Prf, Prf) {
    let (pred_nodes, pred_edges) = selection_multisets(g, sel);
    let (gold_nodes, gold_edges) = graph_multisets(gold);
    (
        prf_between(&pred_nodes, &gold_nodes),
        prf_between(&pred_edges, &gold_edges),
    )
}

/// Same comparison for two stand-alone graphs (e.g. serialized summary
/// files), used by the evaluation command.
pub fn graph_node_edge_prf(predicted: &AmrGraph, gold: &AmrGraph) -> (Prf, Prf) {
    let (pn, pe) = graph_multisets(predicted);
    let (gn, ge) = graph_multisets(gold);
    (prf_between(&pn, &gn), prf_between(&pe, &ge))
}

fn prf_between(pred: &HashMap<String, usize>, gold: &HashMap<String, usize>) -> Prf {
    let matched = clipped_overlap(pred, gold) as f64;
    let predicted: usize = pred.values().sum();
    let gold_total: usize = gold.values().sum();
    Prf::from_counts(matched, predicted as f64, gold_total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amr::parse_penman;
    use crate::source_graph::build_source_graph;
    use crate::trainer::project_gold;

    #[test]
    fn projection_matches_itself_perfectly() {
        let graphs = vec![
            parse_penman("(s / state-01 :ARG0 (g / government) :ARG1 (w / warhead))").unwrap(),
        ];
        let g = build_source_graph(&graphs, None).unwrap();
        let gold = parse_penman("(s / state-01 :ARG1 (w / warhead))").unwrap();
        let proj = project_gold(&gold, &g);
        assert_eq!(proj.coverage, 1.0);
        let (nodes, edges) = node_edge_prf(&g, &proj.selection, &gold);
        assert_eq!(nodes.f1, 1.0);
        assert_eq!(edges.f1, 1.0);
    }

    #[test]
    fn hand_counted_partial_match() {
        // Gold has 4 concepts; prediction shares 2 of them and has 3 total:
        // P = 2/3, R = 2/4, F = 2PR/(P+R) = 0.5714...
        let graphs =
            vec![parse_penman("(a / alpha :op1 (b / beta) :op2 (x / xi))").unwrap()];
        let g = build_source_graph(&graphs, None).unwrap();
        let mut sel = Selection::root_only(&g);
        for key in ["alpha", "beta", "xi"] {
            let id = g.nodes.iter().position(|n| n.merge_key == key).unwrap();
            sel.nodes.insert(id);
        }
        let gold =
            parse_penman("(a / alpha :op1 (b / beta) :op3 (c / gamma :mod (d / delta)))").unwrap();
        let (nodes, _) = node_edge_prf(&g, &sel, &gold);
        assert!((nodes.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((nodes.recall - 0.5).abs() < 1e-12);
        assert!((nodes.f1 - 0.5714285714285715).abs() < 1e-12);
    }

    #[test]
    fn empty_prediction_is_all_zeros() {
        let graphs = vec![parse_penman("(a / alpha)").unwrap()];
        let g = build_source_graph(&graphs, None).unwrap();
        let sel = Selection::root_only(&g);
        let gold = parse_penman("(a / alpha :op1 (b / beta))").unwrap();
        let (nodes, edges) = node_edge_prf(&g, &sel, &gold);
        assert_eq!(nodes, Prf::ZERO);
        assert_eq!(edges, Prf::ZERO);
    }

    #[test]
    fn f1_bounded_by_max_of_p_r() {
        let p = Prf::from_counts(3.0, 5.0, 4.0);
        assert!(p.f1 <= p.precision.max(p.recall) + 1e-12);
        assert!(p.precision <= 1.0 && p.recall <= 1.0);
    }
}
