//! Graph-to-PENMAN serialization.
//!
//! Walks every root-to-leaf path in sorted order and writes one concept
//! per line. A concept is emitted in full (with an opening bracket) the
//! first time it is seen; string literals and reentrant mentions are
//! written as `relation concept` without brackets. Closing brackets are
//! computed per path by backtracking to the nearest ancestor that still
//! has an unvisited child edge.

use thiserror::Error;

use super::{AmrGraph, GraphError, NodeId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SerializeError {
    #[error("cannot serialize a cyclic graph")]
    CyclicGraph,
    #[error("invalid graph: {0}")]
    InvalidGraph(GraphError),
}

/// One step of a root-to-leaf path: the node plus the edge that led to it
/// (`None` only for the root).
#[derive(Debug, Clone)]
struct Step {
    node: NodeId,
    in_edge: Option<usize>,
}

fn enumerate_paths(g: &AmrGraph) -> Vec<Vec<Step>> {
    let mut paths = Vec::new();
    let mut current = vec![Step { node: g.root, in_edge: None }];
    fn walk(g: &AmrGraph, current: &mut Vec<Step>, paths: &mut Vec<Vec<Step>>) {
        let node = current.last().unwrap().node;
        let children: Vec<(usize, NodeId)> =
            g.outgoing(node).map(|(i, e)| (i, e.target)).collect();
        if children.is_empty() {
            paths.push(current.clone());
            return;
        }
        for (edge, target) in children {
            current.push(Step { node: target, in_edge: Some(edge) });
            walk(g, current, paths);
            current.pop();
        }
    }
    walk(g, &mut current, &mut paths);
    // Lexicographic over (node index, incoming edge index) steps. The
    // per-step edge component keeps paths that reach the same node
    // through different edges in contiguous groups; sorting on node
    // sequences alone would interleave those groups and misnest the
    // closing brackets around reentrant mentions.
    paths.sort_by(|a, b| {
        let ka: Vec<(NodeId, usize)> = a.iter().map(|s| (s.node, s.in_edge.unwrap_or(0))).collect();
        let kb: Vec<(NodeId, usize)> = b.iter().map(|s| (s.node, s.in_edge.unwrap_or(0))).collect();
        ka.cmp(&kb)
    });
    paths
}

fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Pick the printed variable for each non-literal node. Existing variables
/// are kept when they are complete and collision-free; otherwise all nodes
/// get fresh `n0, n1, ...` names in node-index order.
fn assign_variables(g: &AmrGraph) -> Vec<Option<String>> {
    let non_literal: Vec<NodeId> = (0..g.nodes.len())
        .filter(|&i| !g.nodes[i].is_literal())
        .collect();
    let mut existing = Vec::new();
    for &i in &non_literal {
        match &g.nodes[i].variable {
            Some(v) => existing.push(v.clone()),
            None => break,
        }
    }
    let complete = existing.len() == non_literal.len();
    let distinct = {
        let mut sorted = existing.clone();
        sorted.sort();
        sorted.dedup();
        sorted.len() == existing.len()
    };
    let mut vars: Vec<Option<String>> = vec![None; g.nodes.len()];
    if complete && distinct {
        for &i in &non_literal {
            vars[i] = g.nodes[i].variable.clone();
        }
    } else {
        for (k, &i) in non_literal.iter().enumerate() {
            vars[i] = Some(format!("n{k}"));
        }
    }
    vars
}

/// Serialize a rooted acyclic graph to PENMAN text.
pub fn serialize_penman(g: &AmrGraph) -> Result<String, SerializeError> {
    match g.validate() {
        Ok(()) => {}
        Err(GraphError::Cyclic(_)) => return Err(SerializeError::CyclicGraph),
        Err(e) => return Err(SerializeError::InvalidGraph(e)),
    }
    let vars = assign_variables(g);
    let render_full = |n: NodeId| -> String {
        let c = &g.nodes[n];
        if c.is_literal() {
            escape_literal(&c.label)
        } else {
            format!("{} / {}", vars[n].as_deref().unwrap(), c.label)
        }
    };

    let paths = enumerate_paths(g);
    let mut visited_node = vec![false; g.nodes.len()];
    let mut visited_edge = vec![false; g.edges.len()];
    let mut out = String::new();

    for path in &paths {
        let mut special = false;
        let mut emitted = false;
        let mut k_end = path.len();
        for (idx, step) in path.iter().enumerate() {
            let k = idx + 1; // 1-based position on the path
            let node = step.node;
            let is_last = k == path.len();
            let fresh_node = !visited_node[node];
            let fresh_edge = match step.in_edge {
                Some(e) => !visited_edge[e],
                None => fresh_node, // root's virtual incoming relation
            };
            if fresh_node {
                visited_node[node] = true;
                if let Some(e) = step.in_edge {
                    visited_edge[e] = true;
                }
                emitted = true;
                out.push_str(&"\t".repeat(k - 1));
                let rel = step
                    .in_edge
                    .map(|e| format!(":{} ", g.edges[e].label))
                    .unwrap_or_default();
                if g.nodes[node].is_literal() {
                    out.push_str(&rel);
                    out.push_str(&render_full(node));
                    special = true;
                    k_end = k;
                    break;
                }
                out.push_str(&rel);
                out.push('(');
                out.push_str(&render_full(node));
                if !is_last {
                    out.push('\n');
                } else {
                    k_end = k;
                }
            } else if fresh_edge {
                // Reentrant mention: relation plus bare variable.
                let e = step.in_edge.expect("root cannot be reentrant");
                visited_edge[e] = true;
                emitted = true;
                out.push_str(&"\t".repeat(k - 1));
                out.push_str(&format!(":{} ", g.edges[e].label));
                out.push_str(vars[node].as_deref().unwrap_or(&g.nodes[node].label));
                special = true;
                k_end = k;
                break;
            }
            // Both node and edge already written: keep walking down.
        }
        if !emitted {
            // Fully shared path; everything on it was written earlier.
            continue;
        }
        // Closing brackets: backtrack to the nearest ancestor that still
        // has an unvisited child edge.
        let mut k_prime = 0;
        for idx in (0..k_end - 1).rev() {
            let node = path[idx].node;
            if g.outgoing(node).any(|(e, _)| !visited_edge[e]) {
                k_prime = idx + 1;
                break;
            }
        }
        let count = if special {
            k_end - k_prime - 1
        } else {
            k_end - k_prime
        };
        out.push_str(&")".repeat(count));
        out.push('\n');
    }
    // The algorithm terminates every path with a newline; the block form
    // drops the final one.
    if out.ends_with('\n') {
        out.pop();
    }
    Ok(out)
}
