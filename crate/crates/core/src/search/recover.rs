//! Recovering phase: walks in-edges backwards from result nodes, keeping an
//! edge `n -> q` exactly when `n` expanded to `q` during exploration, i.e.
//! `h[q] = max(h[n], a_nq) + 1` and `n` was not yet joined at level
//! `max(h[n], a_nq)`.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{RaksError, Result};
use crate::graph::{EdgeId, KnowledgeGraph, NodeId};
use crate::ranking::{marginal_score, rpg_score, tie_break_sum, ScoreParams};
use crate::text::KeywordMatch;
use crate::weighting::{ActivationLevels, FineWeights};

use super::result::{CentralGraph, RadialPatternGraph};
use super::state::{Joined, SearchState, INF};

#[derive(Debug, Default)]
pub(crate) struct RecoveredPaths {
    pub nodes: BTreeSet<NodeId>,
    pub edges: BTreeSet<EdgeId>,
}

/// Backward BFS for one keyword column from `starts`.
pub(crate) fn recover_paths(
    graph: &KnowledgeGraph,
    activations: &ActivationLevels,
    state: &SearchState,
    column: usize,
    starts: &[NodeId],
) -> Result<RecoveredPaths> {
    let h = |v: NodeId| state.matrix.get(v, column);
    let mut out = RecoveredPaths::default();
    let mut seen: BTreeSet<NodeId> = BTreeSet::new();
    let mut queue: VecDeque<NodeId> = VecDeque::new();
    for &s in starts {
        if h(s) == INF {
            return Err(RaksError::Internal(format!("recovery start {s} unreached by keyword {column}")));
        }
        out.nodes.insert(s);
        if seen.insert(s) {
            queue.push_back(s);
        }
    }
    while let Some(q) = queue.pop_front() {
        let hq = h(q);
        if hq == 0 {
            continue;
        }
        let mut found = false;
        for (&e, &n) in graph.in_edge_ids(q).iter().zip(graph.in_sources(q)) {
            let hn = h(n);
            if hn == INF {
                continue;
            }
            let level = hn.max(activations.get(e));
            if level + 1 != hq || state.joining.blocked_at(n, level) {
                continue;
            }
            found = true;
            out.edges.insert(e);
            out.nodes.insert(n);
            if hn != 0 && seen.insert(n) {
                queue.push_back(n);
            }
        }
        if !found {
            return Err(RaksError::Internal(format!(
                "node {q} at distance {hq} from keyword {column} has no expanding predecessor"
            )));
        }
    }
    Ok(out)
}

fn contains_any(keywords: &[KeywordMatch], v: NodeId) -> bool {
    keywords.iter().any(|k| k.contains(v))
}

/// Materializes the central graph of an identified central node.
pub fn recover_cg(
    graph: &KnowledgeGraph,
    activations: &ActivationLevels,
    weights: &FineWeights,
    state: &SearchState,
    central_keywords: &[KeywordMatch],
    stub: Joined,
) -> Result<CentralGraph> {
    let mut nodes = BTreeSet::from([stub.node]);
    let mut edges = BTreeSet::new();
    for column in 0..state.keyword_count() {
        let paths = recover_paths(graph, activations, state, column, &[stub.node])?;
        nodes.extend(paths.nodes);
        edges.extend(paths.edges);
    }
    let central_keyword_nodes =
        nodes.iter().copied().filter(|&v| contains_any(central_keywords, v)).collect();
    let keyword_distances = state.matrix.row(stub.node);
    let tie_break = tie_break_sum(edges.iter().map(|&e| weights.get(e)));
    Ok(CentralGraph {
        central_node: stub.node,
        nodes,
        edges,
        central_keyword_nodes,
        keyword_distances,
        score: stub.score,
        tie_break,
        level: stub.level,
    })
}

/// Per-marginal distance `min over V_C of h[v][i]`; `None` while any is
/// unreached.
pub fn marginal_distances(state: &SearchState, cg: &CentralGraph) -> Option<Vec<u32>> {
    (0..state.keyword_count())
        .map(|i| {
            let d = cg.central_keyword_nodes.iter().map(|&v| state.matrix.get(v, i)).min()?;
            (d != INF).then_some(d)
        })
        .collect()
}

/// Extends `cg` with the shortest paths from every marginal keyword to the
/// central keyword nodes achieving that keyword's minimum distance. The PTC
/// flag is left unset for the caller to fill in.
pub fn recover_rpg(
    graph: &KnowledgeGraph,
    activations: &ActivationLevels,
    weights: &FineWeights,
    state: &SearchState,
    cg: &CentralGraph,
    score: &ScoreParams,
) -> Result<RadialPatternGraph> {
    let distances = marginal_distances(state, cg).ok_or_else(|| {
        RaksError::Internal(format!("central node {} not reached by every marginal keyword", cg.central_node))
    })?;
    let mut marginal_nodes = BTreeSet::new();
    let mut marginal_edges = BTreeSet::new();
    for (column, &d) in distances.iter().enumerate() {
        let starts: Vec<NodeId> = cg
            .central_keyword_nodes
            .iter()
            .copied()
            .filter(|&v| state.matrix.get(v, column) == d)
            .collect();
        let paths = recover_paths(graph, activations, state, column, &starts)?;
        marginal_nodes.extend(paths.nodes);
        marginal_edges.extend(paths.edges);
    }
    let sm = marginal_score(&distances);
    let all_edges: BTreeSet<EdgeId> = cg.edges.union(&marginal_edges).copied().collect();
    Ok(RadialPatternGraph {
        base: cg.clone(),
        marginal_nodes,
        marginal_edges,
        marginal_distances: distances,
        marginal_score: sm,
        combined_score: rpg_score(f64::from(cg.score), f64::from(sm), score),
        tie_break: tie_break_sum(all_edges.iter().map(|&e| weights.get(e))),
        ptc: false,
    })
}
