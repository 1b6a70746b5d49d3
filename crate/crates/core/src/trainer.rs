//! Structured training: perceptron and ramp losses with subgradient
//! updates over (source graph, gold summary) instances.
//!
//! The perceptron loss compares the decoded graph against the gold; it
//! breaks down when the gold is unreachable through decoding. The ramp
//! loss instead compares cost-augmented and cost-discounted decodes and
//! stays non-negative even for imperfect golds, which is why golds are
//! always projected onto the source graph first.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::amr::AmrGraph;
use crate::decoder::{
    decode, objective, CostSign, CostSpec, Decoded, Model, Selection, DEFAULT_EXPANSION_CAP,
};
use crate::features::GraphFeatures;
use crate::source_graph::{collapse_entities, SourceGraph};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("no training instances")]
    NoInstances,
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Perceptron,
    Ramp,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub epochs: usize,
    pub step_size: f64,
    pub seed: u64,
    pub averaging: bool,
    pub expansion_cap: u64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            loss: LossKind::Ramp,
            epochs: 20,
            step_size: 0.1,
            seed: 1,
            averaging: true,
            expansion_cap: DEFAULT_EXPANSION_CAP,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be >= 1".into()));
        }
        if !(self.step_size > 0.0) {
            return Err(TrainError::Config("step size must be > 0".into()));
        }
        Ok(())
    }
}

/// One training instance: a source graph with its feature vectors and the
/// projected gold selection.
#[derive(Debug, Clone)]
pub struct TrainingInstance {
    pub id: String,
    pub graph: SourceGraph,
    pub features: GraphFeatures,
    pub gold: Selection,
    /// Fraction of gold concepts that mapped onto the source graph.
    pub coverage: f64,
}

/// Sparse subgradients for the node and edge weight vectors.
#[derive(Debug, Clone, Default)]
pub struct Gradients {
    pub node: HashMap<String, f64>,
    pub edge: HashMap<String, f64>,
}

impl Gradients {
    pub fn is_zero(&self) -> bool {
        self.node.values().all(|&v| v == 0.0) && self.edge.values().all(|&v| v == 0.0)
    }
}

/// Accumulate feature counts of a selection. ROOT fires no node features
/// and connectivity edges have fixed zero score, so neither contributes.
fn accumulate(
    sel: &Selection,
    g: &SourceGraph,
    feats: &GraphFeatures,
    sign: f64,
    grads: &mut Gradients,
) {
    for &n in &sel.nodes {
        for name in feats.nodes[n].iter() {
            *grads.node.entry(name.to_string()).or_insert(0.0) += sign;
        }
    }
    for &e in &sel.edges {
        if g.edges[e].is_snt_root() {
            continue;
        }
        for name in feats.edges[e].iter() {
            *grads.edge.entry(name.to_string()).or_insert(0.0) += sign;
        }
    }
}

fn gradient_between(
    winner: &Selection,
    loser: &Selection,
    g: &SourceGraph,
    feats: &GraphFeatures,
) -> Gradients {
    let mut grads = Gradients::default();
    accumulate(winner, g, feats, 1.0, &mut grads);
    accumulate(loser, g, feats, -1.0, &mut grads);
    grads.node.retain(|_, v| *v != 0.0);
    grads.edge.retain(|_, v| *v != 0.0);
    grads
}

/// Structured perceptron loss: score of the decoded graph minus score of
/// the gold, with the corresponding feature-difference subgradient.
/// Non-negative whenever the gold is reachable.
pub fn perceptron_loss(
    inst: &TrainingInstance,
    m: &Model,
    expansion_cap: u64,
) -> (f64, Gradients, Decoded) {
    let decoded = decode(&inst.graph, m, &inst.features, None, expansion_cap);
    let loss = objective(&decoded.selection, &inst.graph, m, &inst.features, None)
        - objective(&inst.gold, &inst.graph, m, &inst.features, None);
    let grads = gradient_between(&decoded.selection, &inst.gold, &inst.graph, &inst.features);
    (loss, grads, decoded)
}

/// Structured ramp loss: the cost-augmented maximum minus the
/// cost-discounted maximum. Always non-negative.
pub fn ramp_loss(
    inst: &TrainingInstance,
    m: &Model,
    expansion_cap: u64,
) -> (f64, Gradients, Decoded, Decoded) {
    let plus_spec = CostSpec { gold: &inst.gold, sign: CostSign::Plus };
    let minus_spec = CostSpec { gold: &inst.gold, sign: CostSign::Minus };
    let plus = decode(&inst.graph, m, &inst.features, Some(&plus_spec), expansion_cap);
    let minus = decode(&inst.graph, m, &inst.features, Some(&minus_spec), expansion_cap);
    let loss = objective(&plus.selection, &inst.graph, m, &inst.features, Some(&plus_spec))
        - objective(&minus.selection, &inst.graph, m, &inst.features, Some(&minus_spec));
    let grads = gradient_between(&plus.selection, &minus.selection, &inst.graph, &inst.features);
    (loss, grads, plus, minus)
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: Model,
    pub epoch_losses: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Subgradient training with per-epoch shuffling and optional weight
/// averaging. Deterministic for a fixed seed.
pub fn train(
    instances: &[TrainingInstance],
    budget: usize,
    config: &TrainConfig,
) -> Result<TrainReport, TrainError> {
    config.validate()?;
    if instances.is_empty() {
        return Err(TrainError::NoInstances);
    }
    let mut model = Model::new(budget);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut warnings = Vec::new();
    let mut epoch_losses = Vec::new();
    // Running sums for averaged weights.
    let mut node_sum: HashMap<String, f64> = HashMap::new();
    let mut edge_sum: HashMap<String, f64> = HashMap::new();
    let mut steps: f64 = 0.0;

    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..instances.len()).collect();
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &idx in &order {
            let inst = &instances[idx];
            let (loss, grads, optimal) = match config.loss {
                LossKind::Perceptron => {
                    let (loss, grads, d) = perceptron_loss(inst, &model, config.expansion_cap);
                    (loss, grads, d.optimal)
                }
                LossKind::Ramp => {
                    let (loss, grads, p, m2) = ramp_loss(inst, &model, config.expansion_cap);
                    (loss, grads, p.optimal && m2.optimal)
                }
            };
            if !optimal {
                warnings.push(format!(
                    "epoch {epoch}: decode hit the expansion cap on instance {}; using best found",
                    inst.id
                ));
            }
            epoch_loss += loss;
            for (name, g) in &grads.node {
                let w = model.node_weights.entry(name.clone()).or_insert(0.0);
                *w -= config.step_size * g;
            }
            for (name, g) in &grads.edge {
                let w = model.edge_weights.entry(name.clone()).or_insert(0.0);
                *w -= config.step_size * g;
            }
            if config.averaging {
                steps += 1.0;
                for (name, w) in &model.node_weights {
                    *node_sum.entry(name.clone()).or_insert(0.0) += w;
                }
                for (name, w) in &model.edge_weights {
                    *edge_sum.entry(name.clone()).or_insert(0.0) += w;
                }
            }
        }
        epoch_losses.push(epoch_loss / instances.len() as f64);
    }

    if config.averaging && steps > 0.0 {
        model.node_weights = node_sum.into_iter().map(|(k, v)| (k, v / steps)).collect();
        model.edge_weights = edge_sum.into_iter().map(|(k, v)| (k, v / steps)).collect();
    }
    Ok(TrainReport {
        model,
        epoch_losses,
        warnings,
    })
}

/// Result of projecting a reference summary graph onto a source graph.
#[derive(Debug, Clone)]
pub struct Projection {
    pub selection: Selection,
    /// mapped gold concepts / total gold concepts (after entity collapse).
    pub coverage: f64,
    pub mapped_nodes: usize,
    pub total_nodes: usize,
}

/// Map a gold summary graph onto the source graph by merge key, keep the
/// gold edges whose endpoints and label exist, and connect everything
/// into a valid selection via shortest paths from ROOT.
///
/// An empty projection (no overlapping concepts) yields the ROOT-only
/// selection with coverage 0.
pub fn project_gold(gold: &AmrGraph, g: &SourceGraph) -> Projection {
    let collapsed = collapse_entities(gold);
    let key_to_source: HashMap<&str, usize> = g
        .nodes
        .iter()
        .enumerate()
        .filter(|(i, n)| *i != g.root && !n.concept.is_literal())
        .map(|(i, n)| (n.merge_key.as_str(), i))
        .collect();

    // Non-literal gold nodes map by key; literal leaves map through their
    // mapped parent.
    let mut mapping: HashMap<usize, usize> = HashMap::new();
    for (i, concept) in collapsed.nodes.iter().enumerate() {
        if concept.is_literal() {
            continue;
        }
        if let Some(&sid) = key_to_source.get(crate::source_graph::merge_key(concept).as_str()) {
            mapping.insert(i, sid);
        }
    }
    for e in &collapsed.edges {
        if !collapsed.nodes[e.target].is_literal() {
            continue;
        }
        if let Some(&parent) = mapping.get(&e.source) {
            let lit = g.outgoing(parent).find(|(_, se)| {
                se.label == e.label
                    && g.nodes[se.target].concept.is_literal()
                    && g.nodes[se.target].concept.label == collapsed.nodes[e.target].label
            });
            if let Some((_, se)) = lit {
                mapping.insert(e.target, se.target);
            }
        }
    }

    // Gold edges present in the source graph.
    let mut kept_edges: Vec<usize> = Vec::new();
    for e in &collapsed.edges {
        let (Some(&ms), Some(&mt)) = (mapping.get(&e.source), mapping.get(&e.target)) else {
            continue;
        };
        if let Some((id, _)) = g
            .outgoing(ms)
            .find(|(_, se)| se.target == mt && se.label == e.label)
        {
            kept_edges.push(id);
        }
    }
    kept_edges.sort_unstable();
    kept_edges.dedup();

    let mapped: BTreeSet<usize> = mapping.values().copied().collect();
    let selection = connect_selection(g, &mapped, &kept_edges);
    let total = collapsed.nodes.len();
    Projection {
        selection,
        coverage: if total == 0 {
            0.0
        } else {
            mapped.len() as f64 / total as f64
        },
        mapped_nodes: mapped.len(),
        total_nodes: total,
    }
}

/// Grow a valid selection covering `targets`, preferring kept gold edges
/// and otherwise taking fewest-edge paths from the current tree.
fn connect_selection(g: &SourceGraph, targets: &BTreeSet<usize>, kept: &[usize]) -> Selection {
    let mut sel = Selection::root_only(g);
    loop {
        // Attach everything reachable through kept gold edges first.
        let mut changed = true;
        while changed {
            changed = false;
            for &e in kept {
                let edge = &g.edges[e];
                if sel.nodes.contains(&edge.source)
                    && !sel.nodes.contains(&edge.target)
                    && !sel.edges.contains(&e)
                {
                    sel.nodes.insert(edge.target);
                    sel.edges.insert(e);
                    changed = true;
                }
            }
        }
        let Some(&want) = targets.iter().find(|t| !sel.nodes.contains(t)) else {
            break;
        };
        // BFS from the current tree to the nearest missing target;
        // neighbors expand in edge-id order for determinism.
        let mut parent_edge: HashMap<usize, usize> = HashMap::new();
        let mut queue: VecDeque<usize> = sel.nodes.iter().copied().collect();
        let mut seen: BTreeSet<usize> = sel.nodes.clone();
        let mut found: Option<usize> = None;
        'bfs: while let Some(n) = queue.pop_front() {
            for (eid, edge) in g.outgoing(n) {
                if seen.contains(&edge.target) {
                    continue;
                }
                seen.insert(edge.target);
                parent_edge.insert(edge.target, eid);
                if targets.contains(&edge.target) {
                    found = Some(edge.target);
                    break 'bfs;
                }
                queue.push_back(edge.target);
            }
        }
        let Some(found) = found else {
            // Cannot occur in a connected source graph.
            debug_assert!(false, "target {want} unreachable from ROOT");
            break;
        };
        // Walk parents back to the tree, collecting the path.
        let mut path: Vec<usize> = Vec::new();
        let mut at = found;
        while !sel.nodes.contains(&at) {
            let e = parent_edge[&at];
            path.push(e);
            at = g.edges[e].source;
        }
        for e in path.into_iter().rev() {
            sel.nodes.insert(g.edges[e].target);
            sel.edges.insert(e);
        }
    }
    sel
}

const MODEL_HEADER: &str = "amr-summ-model v1";

/// Serialize a model to the text format: header, sorted node and edge
/// weight lines, budget line.
pub fn format_model(m: &Model) -> String {
    let mut out = String::new();
    out.push_str(MODEL_HEADER);
    out.push('\n');
    let mut node_names: Vec<&String> = m.node_weights.keys().collect();
    node_names.sort();
    for name in node_names {
        writeln!(out, "node\t{}\t{:?}", name, m.node_weights[name]).unwrap();
    }
    let mut edge_names: Vec<&String> = m.edge_weights.keys().collect();
    edge_names.sort();
    for name in edge_names {
        writeln!(out, "edge\t{}\t{:?}", name, m.edge_weights[name]).unwrap();
    }
    writeln!(out, "L\t{}", m.budget).unwrap();
    out
}

pub fn parse_model(text: &str) -> Result<Model, TrainError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == MODEL_HEADER => {}
        other => {
            return Err(TrainError::ModelFormat(format!(
                "bad header: {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut model = Model::new(15);
    let mut saw_budget = false;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let parse_weight = |w: &str| -> Result<f64, TrainError> {
            let w: f64 = w.parse().map_err(|_| {
                TrainError::ModelFormat(format!("line {}: bad weight", lineno + 2))
            })?;
            if !w.is_finite() {
                return Err(TrainError::ModelFormat(format!(
                    "line {}: weights must be finite",
                    lineno + 2
                )));
            }
            Ok(w)
        };
        match fields.as_slice() {
            ["node", name, w] => {
                model.node_weights.insert(name.to_string(), parse_weight(w)?);
            }
            ["edge", name, w] => {
                model.edge_weights.insert(name.to_string(), parse_weight(w)?);
            }
            ["L", v] => {
                model.budget = v.parse().map_err(|_| {
                    TrainError::ModelFormat(format!("line {}: bad budget", lineno + 2))
                })?;
                saw_budget = true;
            }
            _ => {
                return Err(TrainError::ModelFormat(format!(
                    "line {}: unrecognized record",
                    lineno + 2
                )))
            }
        }
    }
    if !saw_budget {
        return Err(TrainError::ModelFormat("missing budget line".into()));
    }
    Ok(model)
}

pub fn save_model(m: &Model, path: &Path) -> Result<(), TrainError> {
    std::fs::write(path, format_model(m))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<Model, TrainError> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amr::parse_penman;
    use crate::decoder::{brute_force_decode, validate_selection};
    use crate::features::CorpusStats;
    use crate::source_graph::build_source_graph;
    use std::collections::HashSet;

    fn instance_from(texts: &[&str], gold_text: &str, id: &str) -> TrainingInstance {
        let graphs: Vec<AmrGraph> = texts.iter().map(|t| parse_penman(t).unwrap()).collect();
        let graph = build_source_graph(&graphs, None).unwrap();
        let stats = CorpusStats::build(&Vec::new(), HashSet::new());
        let features = GraphFeatures::extract(&graph, &stats);
        let gold_graph = parse_penman(gold_text).unwrap();
        let proj = project_gold(&gold_graph, &graph);
        TrainingInstance {
            id: id.to_string(),
            graph,
            features,
            gold: proj.selection,
            coverage: proj.coverage,
        }
    }

    #[test]
    fn projection_of_subgraph_has_full_coverage() {
        let inst = instance_from(
            &[
                "(s / state-01 :ARG0 (g / government) :ARG1 (w / warhead))",
                "(b / buy-01 :ARG0 (g / government))",
            ],
            "(s / state-01 :ARG1 (w / warhead))",
            "t",
        );
        assert_eq!(inst.coverage, 1.0);
        validate_selection(&inst.graph, &inst.gold, None).unwrap();
        // ROOT + state + warhead, connected through the kept ARG1 edge and
        // one snt-root edge.
        assert_eq!(inst.gold.nodes.len(), 3);
    }

    #[test]
    fn projection_zero_overlap_is_root_only() {
        let graphs = vec![parse_penman("(a / apple)").unwrap()];
        let g = build_source_graph(&graphs, None).unwrap();
        let gold = parse_penman("(z / zebra :mod (f / fast))").unwrap();
        let proj = project_gold(&gold, &g);
        assert_eq!(proj.selection, Selection::root_only(&g));
        assert_eq!(proj.coverage, 0.0);
    }

    #[test]
    fn projection_partial_coverage() {
        let graphs =
            vec![parse_penman("(a / alpha :op1 (b / beta) :op2 (c / gamma))").unwrap()];
        let g = build_source_graph(&graphs, None).unwrap();
        // Gold has 5 concepts, 3 of which exist in the source.
        let gold = parse_penman(
            "(a / alpha :op1 (b / beta) :op2 (c / gamma) :op3 (d / delta :mod (e / eps)))",
        )
        .unwrap();
        // Independent oracle: intersect merge-key sets.
        let gold_keys: HashSet<String> = gold
            .nodes
            .iter()
            .map(crate::source_graph::merge_key)
            .collect();
        let src_keys: HashSet<String> = g
            .nodes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != g.root)
            .map(|(_, n)| n.merge_key.clone())
            .collect();
        assert_eq!(gold_keys.intersection(&src_keys).count(), 3);
        let proj = project_gold(&gold, &g);
        assert!((proj.coverage - 3.0 / 5.0).abs() < 1e-12);
        validate_selection(&g, &proj.selection, None).unwrap();
    }

    #[test]
    fn perceptron_zero_fixpoint_when_decode_matches_gold() {
        let inst = instance_from(
            &["(s / state-01 :ARG1 (w / warhead))"],
            "(s / state-01 :ARG1 (w / warhead))",
            "t",
        );
        // Weights that make the gold dominant.
        let mut m = Model::new(5);
        for (n, f) in inst.features.nodes.iter().enumerate() {
            if inst.gold.nodes.contains(&n) {
                for name in f.iter() {
                    m.node_weights.insert(name.to_string(), 1.0);
                }
            }
        }
        let (loss, grads, d) = perceptron_loss(&inst, &m, DEFAULT_EXPANSION_CAP);
        assert_eq!(d.selection, inst.gold);
        assert_eq!(loss, 0.0);
        assert!(grads.is_zero());
    }

    #[test]
    fn perceptron_zero_weights_zero_loss() {
        let inst = instance_from(
            &["(s / state-01 :ARG1 (w / warhead))"],
            "(s / state-01)",
            "t",
        );
        let m = Model::new(5);
        let (loss, grads, _) = perceptron_loss(&inst, &m, DEFAULT_EXPANSION_CAP);
        assert_eq!(loss, 0.0);
        // The tie-broken decode is ROOT-only, so the gradient is -f(gold).
        assert!(!grads.is_zero());
        assert!(grads.node.values().all(|&v| v < 0.0));
    }

    #[test]
    fn ramp_loss_nonnegative_and_zero_on_saturated_gold() {
        let inst = instance_from(
            &["(s / state-01 :ARG1 (w / warhead))"],
            "(s / state-01 :ARG1 (w / warhead))",
            "t",
        );
        let mut m = Model::new(5);
        // Strongly positive everywhere: both decodes return the full graph
        // (equal to gold), so the loss vanishes.
        for f in &inst.features.nodes {
            for name in f.iter() {
                m.node_weights.insert(name.to_string(), 10.0);
            }
        }
        let (loss, grads, plus, minus) = ramp_loss(&inst, &m, DEFAULT_EXPANSION_CAP);
        assert_eq!(plus.selection, inst.gold);
        assert_eq!(minus.selection, inst.gold);
        assert_eq!(loss, 0.0);
        assert!(grads.is_zero());
    }

    #[test]
    fn ramp_loss_matches_brute_force_oracle() {
        let inst = instance_from(
            &[
                "(s / state-01 :ARG0 (g / government) :ARG1 (w / warhead))",
                "(b / buy-01 :ARG0 (g / government) :ARG1 (f / fuel))",
            ],
            "(s / state-01 :ARG1 (w / warhead))",
            "t",
        );
        let mut m = Model::new(3);
        m.node_weights.insert("label=warhead".into(), 0.4);
        m.node_weights.insert("label=government".into(), -0.3);
        m.node_weights.insert("label=state".into(), 0.2);
        m.edge_weights.insert("rel=ARG1".into(), 0.15);

        let plus_spec = CostSpec { gold: &inst.gold, sign: CostSign::Plus };
        let minus_spec = CostSpec { gold: &inst.gold, sign: CostSign::Minus };
        let bf_plus =
            brute_force_decode(&inst.graph, &m, &inst.features, Some(&plus_spec), 14).unwrap();
        let bf_minus =
            brute_force_decode(&inst.graph, &m, &inst.features, Some(&minus_spec), 14).unwrap();
        let expected =
            objective(&bf_plus.selection, &inst.graph, &m, &inst.features, Some(&plus_spec))
                - objective(&bf_minus.selection, &inst.graph, &m, &inst.features, Some(&minus_spec));
        let (loss, _, _, _) = ramp_loss(&inst, &m, DEFAULT_EXPANSION_CAP);
        assert_eq!(loss, expected);
        assert!(loss >= 0.0);
    }

    #[test]
    fn zero_epochs_rejected() {
        let cfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
        assert!(matches!(cfg.validate(), Err(TrainError::Config(_))));
        let inst = instance_from(&["(a / apple)"], "(a / apple)", "t");
        assert!(train(&[inst], 5, &cfg).is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let insts = vec![
            instance_from(
                &["(s / state-01 :ARG1 (w / warhead))", "(b / buy-01 :ARG1 (f / fuel))"],
                "(s / state-01 :ARG1 (w / warhead))",
                "a",
            ),
            instance_from(
                &["(r / run-01 :ARG0 (b / boy))", "(j / jump-01 :ARG0 (b / boy))"],
                "(r / run-01 :ARG0 (b / boy))",
                "b",
            ),
        ];
        let cfg = TrainConfig { epochs: 5, ..TrainConfig::default() };
        let r1 = train(&insts, 5, &cfg).unwrap();
        let r2 = train(&insts, 5, &cfg).unwrap();
        assert_eq!(format_model(&r1.model), format_model(&r2.model));
        assert_eq!(r1.epoch_losses, r2.epoch_losses);
    }

    #[test]
    fn perceptron_converges_on_reachable_gold() {
        // Separable case: gold concepts appear only in the gold subtree.
        let inst = instance_from(
            &[
                "(s / state-01 :ARG0 (g / government) :ARG1 (w / warhead) :mod (o / old))",
                "(b / buy-01 :ARG0 (g / government) :ARG1 (f / fuel))",
            ],
            "(s / state-01 :ARG1 (w / warhead))",
            "t",
        );
        assert_eq!(inst.coverage, 1.0);
        let cfg = TrainConfig {
            loss: LossKind::Perceptron,
            epochs: 50,
            averaging: false,
            ..TrainConfig::default()
        };
        let report = train(std::slice::from_ref(&inst), 3, &cfg).unwrap();
        let d = decode(
            &inst.graph,
            &report.model,
            &inst.features,
            None,
            DEFAULT_EXPANSION_CAP,
        );
        assert_eq!(d.selection, inst.gold);
    }

    #[test]
    fn model_round_trip_is_bit_identical() {
        let mut m = Model::new(7);
        m.node_weights.insert("label=warhead".into(), 0.1 + 0.2);
        m.node_weights.insert("freq=5+".into(), -1.5e-9);
        m.edge_weights.insert("rel=ARG0".into(), 2.0 / 3.0);
        let text = format_model(&m);
        let back = parse_model(&text).unwrap();
        assert_eq!(back.budget, 7);
        assert_eq!(m.node_weights, back.node_weights);
        assert_eq!(m.edge_weights, back.edge_weights);
        assert_eq!(format_model(&back), text);
    }

    #[test]
    fn model_parse_errors() {
        assert!(parse_model("wrong header\n").is_err());
        assert!(parse_model("amr-summ-model v1\nnode\tx\tnotanumber\nL\t5\n").is_err());
        assert!(parse_model("amr-summ-model v1\nnode\tx\t1.0\n").is_err());
        assert!(parse_model("amr-summ-model v1\nnode\tx\tNaN\nL\t5\n").is_err());
        assert!(parse_model("amr-summ-model v1\nedge\tx\tinf\nL\t5\n").is_err());
    }
}
