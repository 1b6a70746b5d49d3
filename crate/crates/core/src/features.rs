//! Sparse binarized feature extraction for source graph nodes and edges.
//!
//! Every feature is an indicator: present means 1, absent means 0. Scores
//! are dot products between these vectors and the model's weight maps.

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::amr::{AmrGraph, ConceptKind};
use crate::source_graph::{merge_key, SourceEdge, SourceGraph, SourceNode};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("node {0} is not part of the graph")]
    UnknownNode(usize),
    #[error("edge {0} is not part of the graph")]
    UnknownEdge(usize),
}

/// A set of firing binary features. Only 1-valued entries are stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureVector {
    names: BTreeSet<String>,
}

impl FeatureVector {
    pub fn new() -> FeatureVector {
        FeatureVector::default()
    }

    pub fn fire(&mut self, name: impl Into<String>) {
        self.names.insert(name.into());
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains(name)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    /// Dot product against a sparse weight map: the sum of the weights of
    /// the firing features.
    pub fn dot(&self, weights: &HashMap<String, f64>) -> f64 {
        self.names
            .iter()
            .map(|n| weights.get(n).copied().unwrap_or(0.0))
            .sum()
    }
}

/// Corpus-level statistics needed by the templates: document frequencies,
/// concept depths, TF-IDF quartiles, and the news-event lexicon.
#[derive(Debug, Clone, Default)]
pub struct CorpusStats {
    doc_freq: HashMap<String, usize>,
    avg_depth: HashMap<String, f64>,
    tfidf: HashMap<String, f64>,
    quartiles: [f64; 3],
    event_terms: HashSet<String>,
}

impl CorpusStats {
    /// Gather statistics from the document cluster: one entry per document,
    /// each a list of (entity-collapsed) sentence graphs.
    pub fn build(docs: &[Vec<AmrGraph>], event_terms: HashSet<String>) -> CorpusStats {
        let mut doc_freq: HashMap<String, usize> = HashMap::new();
        let mut tf: HashMap<String, usize> = HashMap::new();
        let mut depth_sum: HashMap<String, (f64, usize)> = HashMap::new();
        for doc in docs {
            let mut seen_in_doc: HashSet<String> = HashSet::new();
            for g in doc {
                let depths = node_depths(g);
                for (n, concept) in g.nodes.iter().enumerate() {
                    let key = merge_key(concept);
                    *tf.entry(key.clone()).or_insert(0) += 1;
                    let entry = depth_sum.entry(key.clone()).or_insert((0.0, 0));
                    entry.0 += depths[n] as f64;
                    entry.1 += 1;
                    seen_in_doc.insert(key);
                }
            }
            for key in seen_in_doc {
                *doc_freq.entry(key).or_insert(0) += 1;
            }
        }
        let n_docs = docs.len().max(1);
        let tfidf: HashMap<String, f64> = tf
            .iter()
            .map(|(key, &count)| {
                let df = doc_freq.get(key).copied().unwrap_or(1).max(1);
                let idf = (n_docs as f64 / df as f64).ln();
                (key.clone(), count as f64 * idf)
            })
            .collect();
        let quartiles = quartile_cuts(tfidf.values().copied());
        let avg_depth = depth_sum
            .into_iter()
            .map(|(k, (sum, n))| (k, sum / n.max(1) as f64))
            .collect();
        CorpusStats {
            doc_freq,
            avg_depth,
            tfidf,
            quartiles,
            event_terms,
        }
    }

    pub fn document_frequency(&self, key: &str) -> usize {
        self.doc_freq.get(key).copied().unwrap_or(0)
    }

    fn tfidf_bucket(&self, key: &str) -> usize {
        let score = self.tfidf.get(key).copied().unwrap_or(0.0);
        self.quartiles.iter().filter(|&&q| score > q).count()
    }
}

/// Per-node depths (edge distance from the root) via BFS.
fn node_depths(g: &AmrGraph) -> Vec<usize> {
    let mut depth = vec![usize::MAX; g.nodes.len()];
    let mut queue = std::collections::VecDeque::new();
    depth[g.root] = 0;
    queue.push_back(g.root);
    while let Some(n) = queue.pop_front() {
        for (_, e) in g.outgoing(n) {
            if depth[e.target] == usize::MAX {
                depth[e.target] = depth[n] + 1;
                queue.push_back(e.target);
            }
        }
    }
    depth.iter_mut().for_each(|d| {
        if *d == usize::MAX {
            *d = 0;
        }
    });
    depth
}

/// Quartile cut points (Q1, Q2, Q3) of a value collection.
fn quartile_cuts(values: impl Iterator<Item = f64>) -> [f64; 3] {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return [0.0; 3];
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let at = |q: f64| -> f64 {
        let idx = ((v.len() - 1) as f64 * q).round() as usize;
        v[idx]
    };
    [at(0.25), at(0.5), at(0.75)]
}

fn freq_bucket(n: usize) -> &'static str {
    match n {
        0 | 1 => "1",
        2 => "2",
        3 | 4 => "3-4",
        _ => "5+",
    }
}

fn depth_bucket(avg: f64) -> &'static str {
    if avg < 1.0 {
        "0"
    } else if avg < 2.0 {
        "1"
    } else if avg < 3.0 {
        "2"
    } else {
        "3+"
    }
}

fn pos_bucket(first_sentence: usize) -> &'static str {
    match first_sentence {
        0 => "first",
        1..=3 => "1-3",
        _ => "4+",
    }
}

fn span_bucket(n: usize) -> &'static str {
    match n {
        0 | 1 => "1",
        2 => "2",
        _ => "3+",
    }
}

/// Features of a source graph node. The synthetic ROOT fires nothing, so
/// the empty (ROOT-only) selection always scores zero.
pub fn node_features(
    node: usize,
    g: &SourceGraph,
    stats: &CorpusStats,
) -> Result<FeatureVector, FeatureError> {
    let n: &SourceNode = g.nodes.get(node).ok_or(FeatureError::UnknownNode(node))?;
    let mut f = FeatureVector::new();
    if node == g.root {
        return Ok(f);
    }
    let key = &n.merge_key;
    f.fire(format!("label={key}"));
    f.fire(format!("freq={}", freq_bucket(n.provenance.len())));
    let avg_depth = stats.avg_depth.get(key).copied().unwrap_or(0.0);
    f.fire(format!("depth={}", depth_bucket(avg_depth)));
    let first = n.provenance.iter().map(|&(s, _)| s).min().unwrap_or(0);
    f.fire(format!("pos={}", pos_bucket(first)));
    if n.concept.kind == ConceptKind::MegaNode {
        if n.concept.label.starts_with("date-entity") {
            f.fire("is-date-entity");
        } else {
            f.fire("is-named-entity");
        }
    } else if n.concept.label == "date-entity" {
        f.fire("is-date-entity");
    }
    f.fire(format!("tfidf=q{}", stats.tfidf_bucket(key)));
    if stats.event_terms.contains(key) || stats.event_terms.contains(&n.concept.label.to_lowercase())
    {
        f.fire("in-event-lexicon");
    }
    f.fire(format!(
        "span={}",
        span_bucket(n.concept.constituent_count())
    ));
    Ok(f)
}

/// Features of a source graph edge. ROOT connectivity edges fire only the
/// diagnostic `is-snt-root-edge` marker and no content features.
pub fn edge_features(
    edge: usize,
    g: &SourceGraph,
    _stats: &CorpusStats,
) -> Result<FeatureVector, FeatureError> {
    let e: &SourceEdge = g.edges.get(edge).ok_or(FeatureError::UnknownEdge(edge))?;
    let mut f = FeatureVector::new();
    if e.is_snt_root() {
        f.fire("is-snt-root-edge");
        return Ok(f);
    }
    f.fire(format!("rel={}", e.label));
    f.fire(format!("relfreq={}", freq_bucket(e.provenance.len())));
    let first = e.provenance.iter().min().copied().unwrap_or(0);
    f.fire(format!("relpos={}", pos_bucket(first)));
    f.fire(format!(
        "rel+src={}+{}",
        e.label, g.nodes[e.source].merge_key
    ));
    Ok(f)
}

/// Node and edge feature vectors for one graph, extracted once and reused
/// across decodes.
#[derive(Debug, Clone)]
pub struct GraphFeatures {
    pub nodes: Vec<FeatureVector>,
    pub edges: Vec<FeatureVector>,
}

impl GraphFeatures {
    pub fn extract(g: &SourceGraph, stats: &CorpusStats) -> GraphFeatures {
        let nodes = (0..g.nodes.len())
            .map(|n| node_features(n, g, stats).expect("node in range"))
            .collect();
        let edges = (0..g.edges.len())
            .map(|e| edge_features(e, g, stats).expect("edge in range"))
            .collect();
        GraphFeatures { nodes, edges }
    }
}
