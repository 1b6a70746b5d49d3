//! Summary graph decoding: find the subtree of a source graph that
//! maximizes the factored node/edge scoring function subject to the tree,
//! connectivity, and node-budget constraints.
//!
//! The search is exact branch-and-bound over frontier edge decisions. A
//! partial tree grows from ROOT one edge at a time; each undecided
//! frontier edge is either committed (its target joins the tree) or
//! permanently excluded. The admissible bound adds the best positive
//! attainable gain of every node still outside the tree, capped by the
//! remaining budget, so pruning never discards an optimum. Cost-augmented
//! and cost-only (oracle) decoding fold per-item disagreement penalties
//! into the item weights.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::features::GraphFeatures;
use crate::source_graph::{SourceEdge, SourceGraph};

/// Safety margin when pruning on incrementally accumulated float bounds.
const BOUND_SLACK: f64 = 1e-9;

/// Default cap on branch-and-bound node expansions.
pub const DEFAULT_EXPANSION_CAP: u64 = 1_000_000;

/// The only implemented tie-break policy: lexicographically smallest
/// sorted node-id list, then smallest sorted edge-id list.
pub const TIE_BREAK_POLICY: &str = "lex-node-ids";

/// Learned weights plus the decoding budget L (content nodes; the
/// synthetic ROOT is not counted).
#[derive(Debug, Clone)]
pub struct Model {
    pub node_weights: HashMap<String, f64>,
    pub edge_weights: HashMap<String, f64>,
    pub budget: usize,
}

impl Model {
    pub fn new(budget: usize) -> Model {
        Model {
            node_weights: HashMap::new(),
            edge_weights: HashMap::new(),
            budget,
        }
    }
}

/// Indicator sets over a source graph: selected node ids and edge ids.
/// A valid selection always contains ROOT.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Selection {
    pub nodes: BTreeSet<usize>,
    pub edges: BTreeSet<usize>,
}

impl Selection {
    pub fn root_only(g: &SourceGraph) -> Selection {
        let mut nodes = BTreeSet::new();
        nodes.insert(g.root);
        Selection {
            nodes,
            edges: BTreeSet::new(),
        }
    }

    pub fn content_node_count(&self, g: &SourceGraph) -> usize {
        self.nodes.iter().filter(|&&n| n != g.root).count()
    }

    fn tie_key(&self) -> (Vec<usize>, Vec<usize>) {
        (
            self.nodes.iter().copied().collect(),
            self.edges.iter().copied().collect(),
        )
    }
}

/// How disagreement costs against a gold selection enter the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostSign {
    /// score + cost: cost-augmented decoding (first ramp component).
    Plus,
    /// score - cost: cost-discounted decoding (second ramp component).
    Minus,
    /// -cost alone: oracle decoding.
    Only,
}

#[derive(Debug, Clone)]
pub struct CostSpec<'a> {
    pub gold: &'a Selection,
    pub sign: CostSign,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("invalid selection: {0}")]
    InvalidSelection(String),
    #[error("graph has {0} nodes, above the brute-force guard {1}")]
    TooLarge(usize, usize),
}

/// Decode output. `optimal` is false only when the expansion cap was hit,
/// in which case the best selection found so far is reported.
#[derive(Debug, Clone)]
pub struct Decoded {
    pub selection: Selection,
    pub objective: f64,
    pub optimal: bool,
    pub expansions: u64,
}

/// Independent validity checker for selections.
///
/// Checks: ROOT selected with no selected incoming edge, selected edge
/// endpoints selected, every other selected node has exactly one selected
/// incoming edge, everything reachable from ROOT over selected edges, and
/// (when a budget is given) at most `budget` content nodes.
pub fn validate_selection(
    g: &SourceGraph,
    sel: &Selection,
    budget: Option<usize>,
) -> Result<(), DecodeError> {
    let bad = |msg: String| Err(DecodeError::InvalidSelection(msg));
    if !sel.nodes.contains(&g.root) {
        return bad("ROOT not selected".into());
    }
    for &n in &sel.nodes {
        if n >= g.nodes.len() {
            return bad(format!("node {n} out of range"));
        }
    }
    for &e in &sel.edges {
        if e >= g.edges.len() {
            return bad(format!("edge {e} out of range"));
        }
        let edge = &g.edges[e];
        if !sel.nodes.contains(&edge.source) || !sel.nodes.contains(&edge.target) {
            return bad(format!("edge {e} has an unselected endpoint"));
        }
    }
    let mut in_count: HashMap<usize, usize> = HashMap::new();
    for &e in &sel.edges {
        *in_count.entry(g.edges[e].target).or_insert(0) += 1;
    }
    if in_count.get(&g.root).copied().unwrap_or(0) != 0 {
        return bad("ROOT has a selected incoming edge".into());
    }
    for &n in &sel.nodes {
        if n == g.root {
            continue;
        }
        let c = in_count.get(&n).copied().unwrap_or(0);
        if c != 1 {
            return bad(format!("node {n} has {c} selected incoming edges"));
        }
    }
    // Connectivity over selected edges only.
    let mut seen = BTreeSet::new();
    let mut stack = vec![g.root];
    while let Some(n) = stack.pop() {
        if !seen.insert(n) {
            continue;
        }
        for &e in &sel.edges {
            if g.edges[e].source == n {
                stack.push(g.edges[e].target);
            }
        }
    }
    if let Some(&n) = sel.nodes.iter().find(|n| !seen.contains(n)) {
        return bad(format!("node {n} not reachable via selected edges"));
    }
    if let Some(b) = budget {
        let content = sel.content_node_count(g);
        if content > b {
            return bad(format!("{content} content nodes exceed budget {b}"));
        }
    }
    Ok(())
}

/// Raw model score of one node. ROOT fires no features, so it is zero.
fn node_score(n: usize, m: &Model, feats: &GraphFeatures) -> f64 {
    feats.nodes[n].dot(&m.node_weights)
}

/// Raw model score of one edge. ROOT connectivity edges carry a fixed
/// score of zero, so they stay selectable without contributing content.
fn edge_score(e: usize, g: &SourceGraph, m: &Model, feats: &GraphFeatures) -> f64 {
    if g.edges[e].is_snt_root() {
        0.0
    } else {
        feats.edges[e].dot(&m.edge_weights)
    }
}

/// The factored scoring function: sum of selected node scores plus sum of
/// selected edge scores.
pub fn score(
    sel: &Selection,
    g: &SourceGraph,
    m: &Model,
    feats: &GraphFeatures,
) -> Result<f64, DecodeError> {
    validate_selection(g, sel, None)?;
    Ok(raw_score(sel, g, m, feats))
}

fn raw_score(sel: &Selection, g: &SourceGraph, m: &Model, feats: &GraphFeatures) -> f64 {
    let nodes: f64 = sel.nodes.iter().map(|&n| node_score(n, m, feats)).sum();
    let edges: f64 = sel
        .edges
        .iter()
        .map(|&e| edge_score(e, g, m, feats))
        .sum();
    nodes + edges
}

/// Number of nodes plus edges on which two selections disagree about
/// inclusion. Symmetric by construction.
pub fn cost(a: &Selection, b: &Selection) -> usize {
    a.nodes.symmetric_difference(&b.nodes).count()
        + a.edges.symmetric_difference(&b.edges).count()
}

/// Canonical objective shared by the exact decoder and the brute-force
/// oracle, so both resolve near-ties identically.
pub fn objective(
    sel: &Selection,
    g: &SourceGraph,
    m: &Model,
    feats: &GraphFeatures,
    cost_spec: Option<&CostSpec>,
) -> f64 {
    let base = raw_score(sel, g, m, feats);
    match cost_spec {
        None => base,
        Some(CostSpec { gold, sign }) => {
            let c = cost(sel, gold) as f64;
            match sign {
                CostSign::Plus => base + c,
                CostSign::Minus => base - c,
                CostSign::Only => -c,
            }
        }
    }
}

/// Per-item weights with the cost deltas folded in. The constant part of
/// the cost does not affect the argmax; candidates are re-scored with
/// [`objective`] whenever they are compared.
struct ItemWeights {
    node: Vec<f64>,
    edge: Vec<f64>,
}

fn item_weights(
    g: &SourceGraph,
    m: &Model,
    feats: &GraphFeatures,
    cost_spec: Option<&CostSpec>,
) -> ItemWeights {
    let mut node: Vec<f64> = (0..g.nodes.len())
        .map(|n| node_score(n, m, feats))
        .collect();
    let mut edge: Vec<f64> = (0..g.edges.len())
        .map(|e| edge_score(e, g, m, feats))
        .collect();
    if let Some(CostSpec { gold, sign }) = cost_spec {
        let (zero_base, in_gold, out_gold) = match sign {
            // Under score+cost, keeping a gold item out earns +1, so
            // selecting it forgoes that unit; non-gold items gain +1.
            CostSign::Plus => (false, -1.0, 1.0),
            CostSign::Minus => (false, 1.0, -1.0),
            CostSign::Only => (true, 1.0, -1.0),
        };
        for (n, w) in node.iter_mut().enumerate() {
            if zero_base {
                *w = 0.0;
            }
            *w += if gold.nodes.contains(&n) { in_gold } else { out_gold };
        }
        for (e, w) in edge.iter_mut().enumerate() {
            if zero_base {
                *w = 0.0;
            }
            *w += if gold.edges.contains(&e) { in_gold } else { out_gold };
        }
    }
    ItemWeights { node, edge }
}

struct Search<'a> {
    g: &'a SourceGraph,
    m: &'a Model,
    feats: &'a GraphFeatures,
    cost_spec: Option<&'a CostSpec<'a>>,
    weights: ItemWeights,
    edges_into: Vec<Vec<usize>>,
    budget: usize,
    cap: u64,
    expansions: u64,
    timed_out: bool,
    in_tree: Vec<bool>,
    chosen: Vec<usize>,
    excluded: Vec<bool>,
    content_count: usize,
    current_gain: f64,
    best: Selection,
    best_objective: f64,
    best_key: (Vec<usize>, Vec<usize>),
}

impl Search<'_> {
    fn current_selection(&self) -> Selection {
        let mut nodes: BTreeSet<usize> = self
            .in_tree
            .iter()
            .enumerate()
            .filter_map(|(n, &t)| t.then_some(n))
            .collect();
        nodes.insert(self.g.root);
        Selection {
            nodes,
            edges: self.chosen.iter().copied().collect(),
        }
    }

    fn consider_current(&mut self) {
        let sel = self.current_selection();
        let obj = objective(&sel, self.g, self.m, self.feats, self.cost_spec);
        let better = obj > self.best_objective
            || (obj == self.best_objective && sel.tie_key() < self.best_key);
        if better {
            self.best_key = sel.tie_key();
            self.best = sel;
            self.best_objective = obj;
        }
    }

    /// Admissible upper bound: current gain plus the largest positive
    /// attainable per-node gains among undecided nodes, capped by the
    /// remaining budget. A node joins with exactly one incoming edge, so
    /// its gain is its weight plus the best non-excluded incoming edge
    /// weight.
    fn bound(&self) -> f64 {
        let remaining = self.budget - self.content_count;
        if remaining == 0 {
            return self.current_gain;
        }
        let mut gains: Vec<f64> = Vec::new();
        for v in 0..self.g.nodes.len() {
            if v == self.g.root || self.in_tree[v] {
                continue;
            }
            let best_in = self.edges_into[v]
                .iter()
                .filter(|&&e| !self.excluded[e])
                .map(|&e| self.weights.edge[e])
                .fold(f64::NEG_INFINITY, f64::max);
            if best_in == f64::NEG_INFINITY {
                continue;
            }
            let gain = self.weights.node[v] + best_in;
            if gain > 0.0 {
                gains.push(gain);
            }
        }
        gains.sort_by(|a, b| b.partial_cmp(a).unwrap());
        self.current_gain + gains.iter().take(remaining).sum::<f64>()
    }

    /// Undecided frontier edge with the highest inclusion gain; ties go to
    /// the lowest edge id so the search order is deterministic.
    fn pick_frontier_edge(&self) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for (e, edge) in self.g.edges.iter().enumerate() {
            if self.excluded[e] || !self.is_frontier(edge) {
                continue;
            }
            let gain = self.weights.edge[e] + self.weights.node[edge.target];
            best = match best {
                None => Some((gain, e)),
                Some((bg, _)) if gain > bg => Some((gain, e)),
                keep => keep,
            };
        }
        best.map(|(_, e)| e)
    }

    fn is_frontier(&self, edge: &SourceEdge) -> bool {
        let src_in = edge.source == self.g.root || self.in_tree[edge.source];
        let tgt_in = edge.target == self.g.root || self.in_tree[edge.target];
        src_in && !tgt_in
    }

    fn search(&mut self) {
        if self.timed_out {
            return;
        }
        self.expansions += 1;
        if self.expansions > self.cap {
            self.timed_out = true;
            return;
        }
        if self.bound() + BOUND_SLACK < self.best_objective {
            return;
        }
        if self.content_count >= self.budget {
            return;
        }
        let Some(e) = self.pick_frontier_edge() else {
            return;
        };
        let v = self.g.edges[e].target;

        // Include: the target joins the tree through this edge.
        self.in_tree[v] = true;
        self.chosen.push(e);
        self.content_count += 1;
        self.current_gain += self.weights.edge[e] + self.weights.node[v];
        self.consider_current();
        self.search();
        self.current_gain -= self.weights.edge[e] + self.weights.node[v];
        self.content_count -= 1;
        self.chosen.pop();
        self.in_tree[v] = false;

        // Exclude: this edge is permanently out.
        self.excluded[e] = true;
        self.search();
        self.excluded[e] = false;
    }
}

/// Exact decoding: the argmax of the (cost-adjusted) objective over all
/// valid selections. Always feasible because the ROOT-only selection is
/// valid.
pub fn decode(
    g: &SourceGraph,
    m: &Model,
    feats: &GraphFeatures,
    cost_spec: Option<&CostSpec>,
    expansion_cap: u64,
) -> Decoded {
    let weights = item_weights(g, m, feats, cost_spec);
    let mut edges_into: Vec<Vec<usize>> = vec![Vec::new(); g.nodes.len()];
    for (e, edge) in g.edges.iter().enumerate() {
        edges_into[edge.target].push(e);
    }
    let root_only = Selection::root_only(g);
    let root_objective = objective(&root_only, g, m, feats, cost_spec);
    let best_key = root_only.tie_key();
    let mut search = Search {
        g,
        m,
        feats,
        cost_spec,
        weights,
        edges_into,
        budget: m.budget,
        cap: expansion_cap,
        expansions: 0,
        timed_out: false,
        in_tree: vec![false; g.nodes.len()],
        chosen: Vec::new(),
        excluded: vec![false; g.edges.len()],
        content_count: 0,
        // Selecting an item shifts the objective by exactly its adjusted
        // weight, so seeding with the ROOT-only objective keeps the
        // incremental gain on the same scale as `objective`.
        current_gain: root_objective,
        best: root_only,
        best_objective: root_objective,
        best_key,
    };
    search.search();
    Decoded {
        selection: search.best,
        objective: search.best_objective,
        optimal: !search.timed_out,
        expansions: search.expansions,
    }
}

/// Exhaustive oracle: enumerate every connected node set containing ROOT
/// within the budget, then every in-edge assignment over it, and keep the
/// best valid selection under the same objective and tie-break as
/// [`decode`]. Guarded to small graphs.
pub fn brute_force_decode(
    g: &SourceGraph,
    m: &Model,
    feats: &GraphFeatures,
    cost_spec: Option<&CostSpec>,
    max_nodes: usize,
) -> Result<Decoded, DecodeError> {
    if g.nodes.len() > max_nodes {
        return Err(DecodeError::TooLarge(g.nodes.len(), max_nodes));
    }
    let mut best = Selection::root_only(g);
    let mut best_objective = objective(&best, g, m, feats, cost_spec);
    let mut best_key = best.tie_key();

    // Enumerate connected content-node sets grown from ROOT. Popping a
    // node from the extension list bans it for the remaining siblings, so
    // each set appears exactly once.
    let mut sets: Vec<Vec<usize>> = Vec::new();
    let initial_ext: Vec<usize> = {
        let mut ext: Vec<usize> = g
            .outgoing(g.root)
            .map(|(_, e)| e.target)
            .filter(|&t| t != g.root)
            .collect();
        ext.sort_unstable();
        ext.dedup();
        ext
    };
    let mut stack: Vec<(Vec<usize>, Vec<usize>, Vec<bool>)> =
        vec![(Vec::new(), initial_ext, vec![false; g.nodes.len()])];
    while let Some((current, mut ext, mut banned)) = stack.pop() {
        sets.push(current.clone());
        if current.len() >= m.budget {
            continue;
        }
        while let Some(v) = ext.pop() {
            banned[v] = true;
            let mut next_ext = ext.clone();
            for (_, e) in g.outgoing(v) {
                let t = e.target;
                if t != g.root && !banned[t] && !current.contains(&t) && !next_ext.contains(&t) {
                    next_ext.push(t);
                }
            }
            let mut next_current = current.clone();
            next_current.push(v);
            stack.push((next_current, next_ext, banned.clone()));
        }
    }

    for members in sets {
        // Candidate in-edges per member, from ROOT or other members.
        let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(members.len());
        let mut feasible = true;
        for &v in &members {
            let cands: Vec<usize> = g
                .incoming(v)
                .filter(|(_, e)| e.source == g.root || members.contains(&e.source))
                .map(|(i, _)| i)
                .collect();
            if cands.is_empty() {
                feasible = false;
                break;
            }
            candidates.push(cands);
        }
        if !feasible {
            continue;
        }
        let mut assignment: Vec<usize> = vec![0; members.len()];
        loop {
            let mut sel = Selection::root_only(g);
            sel.nodes.extend(members.iter().copied());
            for (i, &slot) in assignment.iter().enumerate() {
                sel.edges.insert(candidates[i][slot]);
            }
            if validate_selection(g, &sel, Some(m.budget)).is_ok() {
                let obj = objective(&sel, g, m, feats, cost_spec);
                let better = obj > best_objective
                    || (obj == best_objective && sel.tie_key() < best_key);
                if better {
                    best_key = sel.tie_key();
                    best = sel;
                    best_objective = obj;
                }
            }
            // Odometer advance over the assignment space.
            let mut i = 0;
            while i < assignment.len() {
                assignment[i] += 1;
                if assignment[i] < candidates[i].len() {
                    break;
                }
                assignment[i] = 0;
                i += 1;
            }
            if i == assignment.len() {
                break;
            }
        }
    }
    Ok(Decoded {
        selection: best,
        objective: best_objective,
        optimal: true,
        expansions: 0,
    })
}

/// Materialize a selection as a stand-alone AMR graph rooted at the ROOT
/// concept, ready for PENMAN serialization. Nodes keep ascending source
/// id order; variables are left unset so the serializer assigns fresh
/// ones.
pub fn summary_graph(g: &SourceGraph, sel: &Selection) -> crate::amr::AmrGraph {
    let ordered: Vec<usize> = sel.nodes.iter().copied().collect();
    let index_of: HashMap<usize, usize> = ordered
        .iter()
        .enumerate()
        .map(|(i, &n)| (n, i))
        .collect();
    let mut out = crate::amr::AmrGraph::new(index_of[&g.root]);
    for &n in &ordered {
        let mut concept = g.nodes[n].concept.clone();
        concept.variable = None;
        out.add_node(concept);
    }
    for &e in &sel.edges {
        let edge = &g.edges[e];
        out.add_edge(index_of[&edge.source], &edge.label, index_of[&edge.target]);
    }
    out
}
