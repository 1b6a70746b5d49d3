//! Source graph construction: consolidate sentence AMR graphs into one
//! connected graph via concept merging.
//!
//! Nodes representing the same concept (by surface word form) merge into a
//! single node. Date entities and named entities are first collapsed into
//! "mega-nodes" that only merge with byte-identical fragments. A synthetic
//! ROOT node is connected to every sentence root so the result is always
//! connected. Merging may create directed cycles; only decoded summaries
//! are required to be trees.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::amr::{AmrGraph, Concept, ConceptKind, NodeId};
use crate::text::tokenize;

/// Reserved relation label for ROOT -> sentence-root edges. These edges
/// provide connectivity only and never carry summary content.
pub const SNT_ROOT_LABEL: &str = "snt-root";

/// Reserved merge key of the synthetic ROOT node.
pub const ROOT_KEY: &str = "<ROOT>";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("no input graphs")]
    EmptyInput,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SourceGraphError {
    #[error("node {0} unreachable from ROOT")]
    Unreachable(usize),
    #[error("duplicate merge key `{0}` among non-literal nodes")]
    DuplicateKey(String),
    #[error("node {0} has empty provenance")]
    EmptyProvenance(usize),
    #[error("edge {0} has empty provenance")]
    EmptyEdgeProvenance(usize),
}

/// A merged node with provenance back to the sentence graphs
/// (pairs of sentence index and node id within the collapsed sentence graph).
#[derive(Debug, Clone)]
pub struct SourceNode {
    pub concept: Concept,
    pub provenance: BTreeSet<(usize, NodeId)>,
    pub merge_key: String,
}

impl SourceNode {
    pub fn is_merged(&self) -> bool {
        self.provenance.len() >= 2
    }
}

/// A merged edge; provenance is the set of sentences contributing it.
#[derive(Debug, Clone)]
pub struct SourceEdge {
    pub label: String,
    pub source: usize,
    pub target: usize,
    pub provenance: BTreeSet<usize>,
}

impl SourceEdge {
    pub fn is_snt_root(&self) -> bool {
        self.label == SNT_ROOT_LABEL
    }
}

/// The merged multi-sentence graph. ROOT is always node 0.
#[derive(Debug, Clone)]
pub struct SourceGraph {
    pub nodes: Vec<SourceNode>,
    pub edges: Vec<SourceEdge>,
    pub root: usize,
    /// Sentence count of the inputs, kept for feature extraction.
    pub sentence_count: usize,
}

impl SourceGraph {
    pub fn outgoing(&self, node: usize) -> impl Iterator<Item = (usize, &SourceEdge)> {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.source == node)
    }

    pub fn incoming(&self, node: usize) -> impl Iterator<Item = (usize, &SourceEdge)> {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.target == node)
    }

    /// Content nodes are everything but the synthetic ROOT.
    pub fn content_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&i| i != self.root)
    }

    pub fn validate(&self) -> Result<(), SourceGraphError> {
        let mut seen = HashSet::new();
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            for (_, e) in self.outgoing(n) {
                stack.push(e.target);
            }
        }
        if let Some(n) = (0..self.nodes.len()).find(|n| !seen.contains(n)) {
            return Err(SourceGraphError::Unreachable(n));
        }
        let mut keys = HashSet::new();
        for node in &self.nodes {
            if node.concept.kind != ConceptKind::Literal && !keys.insert(&node.merge_key) {
                return Err(SourceGraphError::DuplicateKey(node.merge_key.clone()));
            }
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if i != self.root && node.provenance.is_empty() {
                return Err(SourceGraphError::EmptyProvenance(i));
            }
        }
        for (i, edge) in self.edges.iter().enumerate() {
            if edge.provenance.is_empty() {
                return Err(SourceGraphError::EmptyEdgeProvenance(i));
            }
        }
        Ok(())
    }
}

/// Canonical merge identity of a concept.
///
/// Frames drop the sense suffix so "state-01" and "state-02" consolidate;
/// literals get a `lit:` prefix and are only merged under a shared parent;
/// mega-nodes merge on the full collapsed label.
pub fn merge_key(c: &Concept) -> String {
    match c.kind {
        ConceptKind::Frame => {
            let stripped = &c.label[..c.label.len() - 3];
            stripped.to_lowercase()
        }
        ConceptKind::Word | ConceptKind::Keyword => c.label.to_lowercase(),
        ConceptKind::Literal => format!("lit:{}", c.label),
        ConceptKind::MegaNode => c.label.clone(),
    }
}

/// Mention clusters from an external coreference system: each cluster is a
/// set of (sentence index, token span) mentions.
#[derive(Debug, Clone, Default)]
pub struct MentionClusters {
    pub clusters: Vec<BTreeSet<(usize, (usize, usize))>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MentionError {
    #[error("line {line}: malformed mention `{entry}` (expected sent:start-end)")]
    Malformed { line: usize, entry: String },
    #[error("mention ({0}, {1}-{2}) appears in more than one cluster")]
    Overlap(usize, usize, usize),
}

impl MentionClusters {
    /// Parse the cluster file format: one cluster per line, mentions
    /// `sentenceIndex:startToken-endToken` separated by spaces.
    pub fn parse(text: &str) -> Result<MentionClusters, MentionError> {
        let mut clusters = Vec::new();
        let mut seen: HashSet<(usize, (usize, usize))> = HashSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cluster = BTreeSet::new();
            for entry in line.split_whitespace() {
                let parsed = (|| {
                    let (sent, span) = entry.split_once(':')?;
                    let (start, end) = span.split_once('-')?;
                    Some((
                        sent.parse::<usize>().ok()?,
                        (start.parse::<usize>().ok()?, end.parse::<usize>().ok()?),
                    ))
                })();
                let mention = parsed.ok_or_else(|| MentionError::Malformed {
                    line: lineno + 1,
                    entry: entry.to_string(),
                })?;
                if !seen.insert(mention) {
                    return Err(MentionError::Overlap(mention.0, mention.1 .0, mention.1 .1));
                }
                cluster.insert(mention);
            }
            if !cluster.is_empty() {
                clusters.push(cluster);
            }
        }
        Ok(MentionClusters { clusters })
    }
}

/// Collapse date-entity and named-entity subtrees into single mega-nodes.
///
/// The mega-node label concatenates the constituent concepts and relations
/// in serialization order, e.g. `date-entity_:year_2002_:month_1_:day_5`.
/// A subtree is only collapsed when none of its inner nodes has a parent
/// outside the subtree.
pub fn collapse_entities(g: &AmrGraph) -> AmrGraph {
    let entity_roots: Vec<NodeId> = (0..g.nodes.len())
        .filter(|&n| is_entity_root(g, n))
        .collect();
    if entity_roots.is_empty() {
        return g.clone();
    }

    // Descendant sets, then keep only maximal, safely collapsible roots.
    let mut collapse: Vec<(NodeId, HashSet<NodeId>)> = Vec::new();
    for &root in &entity_roots {
        let desc = descendants(g, root);
        let inner_ok = desc.iter().all(|&n| {
            n == root
                || g.edges
                    .iter()
                    .filter(|e| e.target == n)
                    .all(|e| desc.contains(&e.source))
        });
        if inner_ok {
            collapse.push((root, desc));
        }
    }
    let maximal: Vec<bool> = collapse
        .iter()
        .map(|(root, _)| {
            !collapse
                .iter()
                .any(|(other, desc)| other != root && desc.contains(root))
        })
        .collect();
    let collapse: Vec<(NodeId, HashSet<NodeId>)> = collapse
        .into_iter()
        .zip(maximal)
        .filter_map(|(c, keep)| keep.then_some(c))
        .collect();
    if collapse.is_empty() {
        return g.clone();
    }

    let root_of: HashMap<NodeId, usize> = collapse
        .iter()
        .enumerate()
        .map(|(i, (r, _))| (*r, i))
        .collect();
    let swallowed: HashSet<NodeId> = collapse
        .iter()
        .flat_map(|(r, desc)| desc.iter().copied().filter(move |n| n != r))
        .collect();

    let mut out = AmrGraph::new(0);
    out.metadata = g.metadata.clone();
    let mut remap: Vec<Option<NodeId>> = vec![None; g.nodes.len()];
    for n in 0..g.nodes.len() {
        if swallowed.contains(&n) {
            continue;
        }
        let id = if let Some(&ci) = root_of.get(&n) {
            out.add_node(Concept::mega(&mega_label(g, collapse[ci].0)))
        } else {
            out.add_node(g.nodes[n].clone())
        };
        remap[n] = Some(id);
    }
    for e in &g.edges {
        let inside_source = swallowed.contains(&e.source) || root_of.contains_key(&e.source);
        if inside_source {
            continue; // folded into the mega label
        }
        if swallowed.contains(&e.target) {
            continue; // unreachable given the safety check, kept for clarity
        }
        out.add_edge(remap[e.source].unwrap(), &e.label, remap[e.target].unwrap());
    }
    out.root = remap[g.root].unwrap_or(0);
    out
}

fn is_entity_root(g: &AmrGraph, n: NodeId) -> bool {
    if g.nodes[n].label == "date-entity" {
        return true;
    }
    // Named-entity pattern: a :name edge to a `name` concept.
    g.outgoing(n)
        .any(|(_, e)| e.label == "name" && g.nodes[e.target].label == "name")
}

fn descendants(g: &AmrGraph, root: NodeId) -> HashSet<NodeId> {
    let mut seen = HashSet::new();
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        if !seen.insert(n) {
            continue;
        }
        for (_, e) in g.outgoing(n) {
            stack.push(e.target);
        }
    }
    seen
}

/// Depth-first concatenation in serialization order: children are visited
/// by (target index, edge index), matching the path sort of the serializer.
fn mega_label(g: &AmrGraph, node: NodeId) -> String {
    let mut out = g.nodes[node].label.clone();
    let mut children: Vec<(usize, &crate::amr::Relation)> = g.outgoing(node).collect();
    children.sort_by_key(|(i, e)| (e.target, *i));
    for (_, e) in children {
        out.push_str("_:");
        out.push_str(&e.label);
        out.push('_');
        out.push_str(&mega_label(g, e.target));
    }
    out
}

/// Ordered `opN` literal strings under a named-entity mega label,
/// recovered from the collapsed label itself.
fn mega_op_string(label: &str) -> Option<String> {
    if !label.contains("_:name_name") {
        return None;
    }
    let mut ops: Vec<(usize, String)> = Vec::new();
    for seg in label.split("_:").skip(1) {
        let (rel, value) = seg.split_once('_')?;
        if let Some(num) = rel.strip_prefix("op") {
            if let Ok(k) = num.parse::<usize>() {
                // A nested value may itself contain separators; take the
                // first constituent only.
                let first = value.split("_:").next().unwrap_or(value);
                ops.push((k, first.to_lowercase()));
            }
        }
    }
    if ops.is_empty() {
        return None;
    }
    ops.sort();
    Some(
        ops.into_iter()
            .map(|(_, v)| v)
            .collect::<Vec<_>>()
            .join(" "),
    )
}

/// Build the connected source graph from sentence graphs.
///
/// Entity subtrees are collapsed first; nodes then merge by `merge_key`,
/// literal leaves merge only under a shared parent, and coreferent nodes
/// merge either via the supplied clusters or via the named-entity
/// fallback. Parallel edges with identical (label, endpoints) union their
/// provenance. ROOT is node 0.
pub fn build_source_graph(
    graphs: &[AmrGraph],
    corefs: Option<&MentionClusters>,
) -> Result<SourceGraph, BuildError> {
    if graphs.is_empty() {
        return Err(BuildError::EmptyInput);
    }
    let collapsed: Vec<AmrGraph> = graphs.iter().map(collapse_entities).collect();

    let mut nodes: Vec<SourceNode> = vec![SourceNode {
        concept: Concept {
            variable: None,
            label: "ROOT".to_string(),
            kind: ConceptKind::Keyword,
        },
        provenance: BTreeSet::new(),
        merge_key: ROOT_KEY.to_string(),
    }];
    let mut by_key: HashMap<String, usize> = HashMap::new();
    let mut node_map: Vec<HashMap<NodeId, usize>> = vec![HashMap::new(); collapsed.len()];

    // Non-literal nodes merge by key.
    for (sent, g) in collapsed.iter().enumerate() {
        for (n, concept) in g.nodes.iter().enumerate() {
            if concept.is_literal() {
                continue;
            }
            let key = merge_key(concept);
            let id = *by_key.entry(key.clone()).or_insert_with(|| {
                nodes.push(SourceNode {
                    concept: Concept {
                        variable: None,
                        label: concept.label.clone(),
                        kind: concept.kind,
                    },
                    provenance: BTreeSet::new(),
                    merge_key: key,
                });
                nodes.len() - 1
            });
            nodes[id].provenance.insert((sent, n));
            node_map[sent].insert(n, id);
        }
    }
    // Literals merge only under a shared (already merged) parent.
    let mut literal_map: HashMap<(usize, String), usize> = HashMap::new();
    for (sent, g) in collapsed.iter().enumerate() {
        for e in &g.edges {
            if !g.nodes[e.target].is_literal() {
                continue;
            }
            let parent = node_map[sent][&e.source];
            let concept = &g.nodes[e.target];
            let id = *literal_map
                .entry((parent, concept.label.clone()))
                .or_insert_with(|| {
                    nodes.push(SourceNode {
                        concept: concept.clone(),
                        provenance: BTreeSet::new(),
                        merge_key: merge_key(concept),
                    });
                    nodes.len() - 1
                });
            nodes[id].provenance.insert((sent, e.target));
            node_map[sent].insert(e.target, id);
        }
    }

    // Coreference merging via union-find.
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    let union = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            // Smaller id wins so the earliest occurrence is representative.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[hi] = lo;
        }
    };
    match corefs {
        Some(clusters) => {
            for cluster in &clusters.clusters {
                let mut members: Vec<usize> = Vec::new();
                for &(sent, (start, end)) in cluster {
                    if sent >= collapsed.len() {
                        continue;
                    }
                    let mention = mention_text(&collapsed[sent], start, end);
                    if mention.is_empty() {
                        continue;
                    }
                    for (&n, &sid) in &node_map[sent] {
                        if sid == 0 {
                            continue;
                        }
                        if node_surface(&collapsed[sent].nodes[n]) == mention {
                            members.push(sid);
                        }
                    }
                }
                members.sort_unstable();
                members.dedup();
                for w in members.windows(2) {
                    union(&mut parent, w[0], w[1]);
                }
            }
        }
        None => {
            // Fallback: merge named-entity mega-nodes whose op strings are
            // equal after lowercasing.
            let mut by_ops: BTreeMap<String, Vec<usize>> = BTreeMap::new();
            for (id, node) in nodes.iter().enumerate() {
                if node.concept.kind == ConceptKind::MegaNode {
                    if let Some(ops) = mega_op_string(&node.concept.label) {
                        by_ops.entry(ops).or_default().push(id);
                    }
                }
            }
            for ids in by_ops.values() {
                for w in ids.windows(2) {
                    union(&mut parent, w[0], w[1]);
                }
            }
        }
    }

    // Rebuild nodes after union-find, keeping representative order.
    let mut final_ids: Vec<usize> = vec![usize::MAX; nodes.len()];
    let mut merged_nodes: Vec<SourceNode> = Vec::new();
    for id in 0..nodes.len() {
        if find(&mut parent, id) == id {
            final_ids[id] = merged_nodes.len();
            merged_nodes.push(nodes[id].clone());
        }
    }
    for id in 0..nodes.len() {
        let rep = find(&mut parent, id);
        if rep != id {
            let fid = final_ids[rep];
            let prov: Vec<_> = nodes[id].provenance.iter().copied().collect();
            merged_nodes[fid].provenance.extend(prov);
        }
        final_ids[id] = final_ids[rep];
    }

    // Edges: remap endpoints, union provenance of identical triples,
    // drop self-loops created by merging.
    let mut edges: Vec<SourceEdge> = Vec::new();
    let mut edge_index: HashMap<(String, usize, usize), usize> = HashMap::new();
    let add_edge = |edges: &mut Vec<SourceEdge>,
                        edge_index: &mut HashMap<(String, usize, usize), usize>,
                        label: &str,
                        src: usize,
                        tgt: usize,
                        sent: usize| {
        if src == tgt {
            return;
        }
        let key = (label.to_string(), src, tgt);
        let id = *edge_index.entry(key).or_insert_with(|| {
            edges.push(SourceEdge {
                label: label.to_string(),
                source: src,
                target: tgt,
                provenance: BTreeSet::new(),
            });
            edges.len() - 1
        });
        edges[id].provenance.insert(sent);
    };
    // ROOT edges first so connectivity edges have low indices.
    for (sent, g) in collapsed.iter().enumerate() {
        let sid = final_ids[node_map[sent][&g.root]];
        add_edge(&mut edges, &mut edge_index, SNT_ROOT_LABEL, 0, sid, sent);
    }
    for (sent, g) in collapsed.iter().enumerate() {
        for e in &g.edges {
            let src = final_ids[node_map[sent][&e.source]];
            let tgt = final_ids[node_map[sent][&e.target]];
            add_edge(&mut edges, &mut edge_index, &e.label, src, tgt, sent);
        }
    }

    Ok(SourceGraph {
        nodes: merged_nodes,
        edges,
        root: 0,
        sentence_count: collapsed.len(),
    })
}

/// Mention token span rendered with the shared tokenizer, joined by spaces.
fn mention_text(g: &AmrGraph, start: usize, end: usize) -> String {
    let Some(snt) = g.sentence() else {
        return String::new();
    };
    let tokens = tokenize(snt);
    if start >= tokens.len() {
        return String::new();
    }
    let end = end.min(tokens.len().saturating_sub(1));
    tokens[start..=end].join(" ")
}

/// Surface form used to match a node against a mention.
fn node_surface(c: &Concept) -> String {
    match c.kind {
        ConceptKind::MegaNode => mega_op_string(&c.label)
            .unwrap_or_else(|| c.label.to_lowercase()),
        _ => merge_key(c),
    }
}
