//! AMR graph data model with PENMAN parsing and serialization.
//!
//! An AMR graph is a rooted, directed, acyclic graph where nodes are
//! concepts and edges are semantic relations. Nodes with in-degree >= 2
//! are reentrancies; they are serialized once in full and afterwards by
//! variable reference.

mod corpus;
mod parse;
mod serialize;

pub use corpus::{read_corpus, read_corpus_str, CorpusBlock, CorpusError};
pub use parse::parse_penman;
pub use serialize::serialize_penman;

use std::collections::HashSet;

use thiserror::Error;

/// Index of a node within an [`AmrGraph`] (insertion order).
pub type NodeId = usize;

/// AMR keywords that are neither framesets nor plain English words.
/// "ROOT" is the reserved synthetic root marker of merged source graphs.
const KEYWORDS: &[&str] = &[
    "ROOT",
    "date-entity",
    "name",
    "and",
    "or",
    "multi-sentence",
    "amr-unknown",
    "truth-value",
    "percentage-entity",
    "monetary-quantity",
    "temporal-quantity",
    "distance-quantity",
    "mass-quantity",
    "ordinal-entity",
];

/// What kind of concept a node label denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConceptKind {
    /// PropBank frameset, label matches `word-NN` ("state-01").
    Frame,
    /// Plain English word ("warhead").
    Word,
    /// Special AMR keyword ("date-entity").
    Keyword,
    /// String literal or constant ("Japan", 2002). No variable, no children.
    Literal,
    /// Collapsed date-entity or named-entity subtree.
    MegaNode,
}

impl ConceptKind {
    /// Classify a non-literal concept label. Frame labels end in a hyphen
    /// followed by exactly two digits; collapsed entity labels contain the
    /// `_:` relation separator, which never occurs in plain AMR labels.
    pub fn classify(label: &str) -> ConceptKind {
        if label.contains("_:") {
            ConceptKind::MegaNode
        } else if is_frame_label(label) {
            ConceptKind::Frame
        } else if KEYWORDS.contains(&label) {
            ConceptKind::Keyword
        } else {
            ConceptKind::Word
        }
    }
}

fn is_frame_label(label: &str) -> bool {
    let bytes = label.as_bytes();
    if bytes.len() < 4 {
        return false;
    }
    let tail = &bytes[bytes.len() - 3..];
    tail[0] == b'-' && tail[1].is_ascii_digit() && tail[2].is_ascii_digit()
}

/// A graph node: an optional variable plus a labeled concept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub variable: Option<String>,
    pub label: String,
    pub kind: ConceptKind,
}

impl Concept {
    pub fn new(variable: Option<&str>, label: &str) -> Concept {
        Concept {
            variable: variable.map(str::to_owned),
            label: label.to_owned(),
            kind: ConceptKind::classify(label),
        }
    }

    pub fn literal(label: &str) -> Concept {
        Concept {
            variable: None,
            label: label.to_owned(),
            kind: ConceptKind::Literal,
        }
    }

    pub fn mega(label: &str) -> Concept {
        Concept {
            variable: None,
            label: label.to_owned(),
            kind: ConceptKind::MegaNode,
        }
    }

    pub fn is_literal(&self) -> bool {
        self.kind == ConceptKind::Literal
    }

    /// Number of original concepts a node stands for. Mega-node labels
    /// concatenate constituents as `label_:rel_label_:rel_label`, so the
    /// count is one plus the number of `_:` separators.
    pub fn constituent_count(&self) -> usize {
        match self.kind {
            ConceptKind::MegaNode => 1 + self.label.matches("_:").count(),
            _ => 1,
        }
    }
}

/// A directed, labeled edge. The label is stored without the ":" sigil;
/// the sigil is added only at serialization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub source: NodeId,
    pub label: String,
    pub target: NodeId,
}

impl Relation {
    pub fn new(source: NodeId, label: &str, target: NodeId) -> Relation {
        debug_assert!(!label.is_empty() && !label.starts_with(':'));
        Relation {
            source,
            label: label.to_owned(),
            target,
        }
    }
}

/// One sentence's meaning: a rooted, directed, acyclic concept graph.
///
/// Nodes and edges keep insertion order; that order is the "concept index"
/// used to sort paths during serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct AmrGraph {
    pub nodes: Vec<Concept>,
    pub edges: Vec<Relation>,
    pub root: NodeId,
    /// `# ::key value` lines captured from the PENMAN block, in order.
    pub metadata: Vec<(String, String)>,
}

/// Violations of the [`AmrGraph`] structural invariants.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no nodes")]
    Empty,
    #[error("edge endpoint {0} out of bounds")]
    BadEndpoint(NodeId),
    #[error("node {0} is not reachable from the root")]
    Unreachable(NodeId),
    #[error("graph contains a directed cycle through node {0}")]
    Cyclic(NodeId),
    #[error("literal node {0} has an outgoing edge")]
    LiteralWithChildren(NodeId),
}

impl AmrGraph {
    pub fn new(root: NodeId) -> AmrGraph {
        AmrGraph {
            nodes: Vec::new(),
            edges: Vec::new(),
            root,
            metadata: Vec::new(),
        }
    }

    /// Build a graph from parts, in insertion order.
    pub fn from_parts(nodes: Vec<Concept>, edges: Vec<Relation>, root: NodeId) -> AmrGraph {
        AmrGraph {
            nodes,
            edges,
            root,
            metadata: Vec::new(),
        }
    }

    pub fn add_node(&mut self, concept: Concept) -> NodeId {
        self.nodes.push(concept);
        self.nodes.len() - 1
    }

    pub fn add_edge(&mut self, source: NodeId, label: &str, target: NodeId) {
        self.edges.push(Relation::new(source, label, target));
    }

    /// Sentence text from `::snt` metadata, if present.
    pub fn sentence(&self) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == "snt")
            .map(|(_, v)| v.as_str())
    }

    pub fn outgoing(&self, node: NodeId) -> impl Iterator<Item = (usize, &Relation)> {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.source == node)
    }

    pub fn in_degree(&self, node: NodeId) -> usize {
        self.edges.iter().filter(|e| e.target == node).count()
    }

    /// Node ids with in-degree >= 2.
    pub fn reentrant_nodes(&self) -> Vec<NodeId> {
        let mut indeg = vec![0usize; self.nodes.len()];
        for e in &self.edges {
            indeg[e.target] += 1;
        }
        (0..self.nodes.len()).filter(|&i| indeg[i] >= 2).collect()
    }

    /// Check rootedness, acyclicity, and literal leaf-ness.
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.nodes.is_empty() {
            return Err(GraphError::Empty);
        }
        for e in &self.edges {
            if e.source >= self.nodes.len() {
                return Err(GraphError::BadEndpoint(e.source));
            }
            if e.target >= self.nodes.len() {
                return Err(GraphError::BadEndpoint(e.target));
            }
            if self.nodes[e.source].is_literal() {
                return Err(GraphError::LiteralWithChildren(e.source));
            }
        }
        // Reachability from the root.
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
            return Err(GraphError::Unreachable(n));
        }
        // Acyclicity via iterative three-color DFS.
        let mut color = vec![0u8; self.nodes.len()]; // 0 white, 1 gray, 2 black
        let mut stack: Vec<(NodeId, bool)> = vec![(self.root, false)];
        while let Some((n, done)) = stack.pop() {
            if done {
                color[n] = 2;
                continue;
            }
            if color[n] == 2 {
                continue;
            }
            color[n] = 1;
            stack.push((n, true));
            for (_, e) in self.outgoing(n) {
                match color[e.target] {
                    1 => return Err(GraphError::Cyclic(e.target)),
                    0 => stack.push((e.target, false)),
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Structural isomorphism: a root-preserving bijection that matches
    /// concept labels, kinds, relation labels, and sharing structure.
    /// Variable names are ignored. Ambiguous child pairings are resolved
    /// by backtracking, so symmetric subtrees do not cause false negatives.
    pub fn isomorphic(&self, other: &AmrGraph) -> bool {
        if self.nodes.len() != other.nodes.len() || self.edges.len() != other.edges.len() {
            return false;
        }
        let mut state = IsoState {
            a: self,
            b: other,
            map: vec![None; self.nodes.len()],
            rmap: vec![None; other.nodes.len()],
            trail: Vec::new(),
        };
        state.try_match(self.root, other.root)
    }
}

struct IsoState<'a> {
    a: &'a AmrGraph,
    b: &'a AmrGraph,
    map: Vec<Option<NodeId>>,
    rmap: Vec<Option<NodeId>>,
    trail: Vec<(NodeId, NodeId)>,
}

impl IsoState<'_> {
    fn try_match(&mut self, a: NodeId, b: NodeId) -> bool {
        match (self.map[a], self.rmap[b]) {
            (Some(m), _) => return m == b,
            (None, Some(_)) => return false,
            (None, None) => {}
        }
        let ca = &self.a.nodes[a];
        let cb = &self.b.nodes[b];
        if ca.label != cb.label || ca.kind != cb.kind {
            return false;
        }
        let ea: Vec<&Relation> = self.a.outgoing(a).map(|(_, e)| e).collect();
        let eb: Vec<&Relation> = self.b.outgoing(b).map(|(_, e)| e).collect();
        if ea.len() != eb.len() {
            return false;
        }
        let mark = self.trail.len();
        self.map[a] = Some(b);
        self.rmap[b] = Some(a);
        self.trail.push((a, b));
        let mut used = vec![false; eb.len()];
        if self.assign_children(&ea, &eb, 0, &mut used) {
            return true;
        }
        self.rollback(mark);
        false
    }

    fn assign_children(
        &mut self,
        ea: &[&Relation],
        eb: &[&Relation],
        i: usize,
        used: &mut [bool],
    ) -> bool {
        if i == ea.len() {
            return true;
        }
        for (j, cand) in eb.iter().enumerate() {
            if used[j] || cand.label != ea[i].label {
                continue;
            }
            let mark = self.trail.len();
            used[j] = true;
            if self.try_match(ea[i].target, cand.target)
                && self.assign_children(ea, eb, i + 1, used)
            {
                return true;
            }
            used[j] = false;
            self.rollback(mark);
        }
        false
    }

    fn rollback(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (a, b) = self.trail.pop().unwrap();
            self.map[a] = None;
            self.rmap[b] = None;
        }
    }
}
