//! Slow reference implementations of keyword distances, shortest-path sets,
//! pass-through checks and the whole query, written without the level
//! structures of the engine. Meant for tests and small graphs only.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet, VecDeque};

use crate::error::{RaksError, Result};
use crate::graph::{EdgeId, KnowledgeGraph, NodeId};
use crate::ranking::{marginal_score, rank_results, rpg_score, tie_break_sum};
use crate::search::{
    distinct_results, CentralGraph, QueryResult, RadialPatternGraph, ResolvedQuery, SearchParams,
    StructureKey,
};
use crate::text::KeywordMatch;
use crate::weighting::{ActivationLevels, FineWeights};

pub const UNREACHED: u32 = u32::MAX;

/// Longest path the exhaustive enumerators will accept.
pub const MAX_ENUMERATED_EDGES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Path length cap for exhaustive enumeration.
    pub max_path_edges: usize,
    /// Whether identified nodes stop relaying paths, as in the engine.
    pub cf_mirror: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { max_path_edges: 8, cf_mirror: true }
    }
}

impl OracleConfig {
    pub fn new(max_path_edges: usize, cf_mirror: bool) -> Result<Self> {
        if max_path_edges > MAX_ENUMERATED_EDGES {
            return Err(RaksError::InvalidParams(format!(
                "exhaustive enumeration capped at {MAX_ENUMERATED_EDGES} edges"
            )));
        }
        Ok(Self { max_path_edges, cf_mirror })
    }
}

#[inline]
fn extend(score: u32, a: u32) -> u32 {
    score.max(a) + 1
}

/// Best path score from any of `sources` to every node, ignoring joins.
pub fn oracle_distances(
    graph: &KnowledgeGraph,
    activations: &ActivationLevels,
    sources: &[NodeId],
) -> Vec<u32> {
    let mut dist = vec![UNREACHED; graph.node_count()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s as usize] = 0;
        heap.push(Reverse((0u32, s)));
    }
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u as usize] {
            continue;
        }
        for e in graph.out_edges(u) {
            let nd = extend(d, activations.get(e.id));
            if nd < dist[e.dst as usize] {
                dist[e.dst as usize] = nd;
                heap.push(Reverse((nd, e.dst)));
            }
        }
    }
    dist
}

pub fn oracle_distance(
    graph: &KnowledgeGraph,
    activations: &ActivationLevels,
    sources: &[NodeId],
    target: NodeId,
) -> Option<u32> {
    let d = oracle_distances(graph, activations, sources)[target as usize];
    (d != UNREACHED).then_some(d)
}

fn enumerate_paths(
    graph: &KnowledgeGraph,
    activations: &ActivationLevels,
    sources: &[NodeId],
    max_edges: usize,
    visit: &mut dyn FnMut(&[EdgeId], NodeId, u32),
) {
    #[allow(clippy::too_many_arguments)]
    fn walk(
        graph: &KnowledgeGraph,
        activations: &ActivationLevels,
        at: NodeId,
        score: u32,
        max_edges: usize,
        on_path: &mut Vec<bool>,
        path: &mut Vec<EdgeId>,
        visit: &mut dyn FnMut(&[EdgeId], NodeId, u32),
    ) {
        visit(path, at, score);
        if path.len() == max_edges {
            return;
        }
        for e in graph.out_edges(at) {
            if on_path[e.dst as usize] {
                continue;
            }
            on_path[e.dst as usize] = true;
            path.push(e.id);
            let next = extend(score, activations.get(e.id));
            walk(graph, activations, e.dst, next, max_edges, on_path, path, visit);
            path.pop();
            on_path[e.dst as usize] = false;
        }
    }
    let mut on_path = vec![false; graph.node_count()];
    let mut path = Vec::new();
    for &s in sources.iter().collect::<BTreeSet<_>>() {
        on_path[s as usize] = true;
        walk(graph, activations, s, 0, max_edges, &mut on_path, &mut path, visit);
        on_path[s as usize] = false;
    }
}

/// Minimum score over every simple path of at most `cfg.max_path_edges`
/// edges from `sources`, for every node.
pub fn exhaustive_distances(
    graph: &KnowledgeGraph,
    activations: &ActivationLevels,
    sources: &[NodeId],
    cfg: &OracleConfig,
) -> Vec<u32> {
    let mut best = vec![UNREACHED; graph.node_count()];
    enumerate_paths(graph, activations, sources, cfg.max_path_edges, &mut |_, at, s| {
        best[at as usize] = best[at as usize].min(s);
    });
    best
}

/// Union of edges over every enumerated path to `target` on which each node
/// is reached at its best score.
pub fn exhaustive_shortest_path_edges(
    graph: &KnowledgeGraph,
    activations: &ActivationLevels,
    sources: &[NodeId],
    target: NodeId,
    cfg: &OracleConfig,
) -> BTreeSet<EdgeId> {
    let best = exhaustive_distances(graph, activations, sources, cfg);
    let mut edges = BTreeSet::new();
    enumerate_paths(graph, activations, sources, cfg.max_path_edges, &mut |path, at, s| {
        if at != target || s != best[target as usize] {
            return;
        }
        let mut score = 0;
        let optimal = path.iter().all(|&e| {
            score = extend(score, activations.get(e));
            score == best[graph.edge_target(e) as usize]
        });
        if optimal {
            edges.extend(path.iter().copied());
        }
    });
    edges
}

/// Keyword distances computed with joined nodes blocked the way the engine
/// blocks them: a node whose row is complete with maximum `J` relays nothing
/// at levels `>= J`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleMatrix {
    columns: usize,
    dist: Vec<u32>,
    blocking: bool,
}

impl OracleMatrix {
    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn get(&self, v: NodeId, column: usize) -> u32 {
        self.dist[v as usize * self.columns + column]
    }

    pub fn row(&self, v: NodeId) -> &[u32] {
        let start = v as usize * self.columns;
        &self.dist[start..start + self.columns]
    }

    /// Row-major copy, comparable with the engine's matrix snapshot.
    pub fn cells(&self) -> &[u32] {
        &self.dist
    }

    pub fn join_level(&self, v: NodeId) -> Option<u32> {
        if !self.blocking || self.columns == 0 {
            return None;
        }
        let row = self.row(v);
        if row.contains(&UNREACHED) {
            None
        } else {
            row.iter().copied().max()
        }
    }

    pub fn blocked_at(&self, v: NodeId, level: u32) -> bool {
        self.join_level(v).is_some_and(|j| j <= level)
    }
}

/// Event-driven search over all keyword columns at once. An edge `u -> x`
/// fires at level `max(h[u], a)` unless `u` is blocked then; events at levels
/// `>= max_level` never fire.
pub fn oracle_matrix(
    graph: &KnowledgeGraph,
    activations: &ActivationLevels,
    keywords: &[KeywordMatch],
    blocking: bool,
    max_level: u32,
) -> OracleMatrix {
    let columns = keywords.len();
    let mut m =
        OracleMatrix { columns, dist: vec![UNREACHED; graph.node_count() * columns], blocking };
    let mut events: BinaryHeap<Reverse<(u32, usize, NodeId, EdgeId)>> = BinaryHeap::new();
    let schedule = |events: &mut BinaryHeap<_>, v: NodeId, column: usize, d: u32| {
        for e in graph.out_edges(v) {
            let level = d.max(activations.get(e.id));
            if level < max_level {
                events.push(Reverse((level, column, v, e.id)));
            }
        }
    };
    for (column, kw) in keywords.iter().enumerate() {
        for &v in &kw.nodes {
            m.dist[v as usize * columns + column] = 0;
        }
    }
    for (column, kw) in keywords.iter().enumerate() {
        for &v in &kw.nodes {
            schedule(&mut events, v, column, 0);
        }
    }
    while let Some(Reverse((level, column, u, e))) = events.pop() {
        if m.blocked_at(u, level) {
            continue;
        }
        let x = graph.edge_target(e);
        let cell = x as usize * columns + column;
        if m.dist[cell] != UNREACHED {
            continue;
        }
        m.dist[cell] = level + 1;
        schedule(&mut events, x, column, level + 1);
    }
    m
}

/// Union of edges over all paths ending at `targets` whose every prefix is
/// optimal under `m`'s column, skipping relays through blocked nodes.
/// `None` if a target is unreached.
pub fn oracle_shortest_path_edges(
    graph: &KnowledgeGraph,
    activations: &ActivationLevels,
    m: &OracleMatrix,
    column: usize,
    targets: &[NodeId],
) -> Option<BTreeSet<EdgeId>> {
    if targets.iter().any(|&t| m.get(t, column) == UNREACHED) {
        return None;
    }
    let mut tight: HashMap<NodeId, Vec<(EdgeId, NodeId)>> = HashMap::new();
    for e in graph.edges() {
        let (dn, dq) = (m.get(e.src, column), m.get(e.dst, column));
        if dn == UNREACHED || dq == UNREACHED {
            continue;
        }
        let level = dn.max(activations.get(e.id));
        if level + 1 == dq && !m.blocked_at(e.src, level) {
            tight.entry(e.dst).or_default().push((e.id, e.src));
        }
    }
    let mut edges = BTreeSet::new();
    let mut seen: HashSet<NodeId> = targets.iter().copied().collect();
    let mut queue: VecDeque<NodeId> = seen.iter().copied().collect();
    while let Some(q) = queue.pop_front() {
        for &(e, n) in tight.get(&q).map(Vec::as_slice).unwrap_or_default() {
            edges.insert(e);
            if seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    Some(edges)
}

/// Pass-through check by explicit pairwise search in the undirected result.
pub fn oracle_ptc(
    graph: &KnowledgeGraph,
    nodes: &BTreeSet<NodeId>,
    edges: &BTreeSet<EdgeId>,
    central_keyword_nodes: &BTreeSet<NodeId>,
    marginal: &[KeywordMatch],
) -> bool {
    let mut adj: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    for &e in edges {
        let r = graph.edge(e);
        adj.entry(r.src).or_default().push(r.dst);
        adj.entry(r.dst).or_default().push(r.src);
    }
    let reach = |from: NodeId, avoid: &BTreeSet<NodeId>| -> HashSet<NodeId> {
        let mut seen = HashSet::from([from]);
        let mut stack = vec![from];
        while let Some(u) = stack.pop() {
            for &x in adj.get(&u).map(Vec::as_slice).unwrap_or_default() {
                if !avoid.contains(&x) && seen.insert(x) {
                    stack.push(x);
                }
            }
        }
        seen
    };
    let keyword_nodes: Vec<NodeId> =
        nodes.iter().copied().filter(|&v| marginal.iter().any(|k| k.contains(v))).collect();
    if marginal.len() <= 1 {
        let none = BTreeSet::new();
        return keyword_nodes
            .iter()
            .any(|&x| reach(x, &none).iter().any(|v| central_keyword_nodes.contains(v)));
    }
    for (i, &x) in keyword_nodes.iter().enumerate() {
        for &y in &keyword_nodes[i + 1..] {
            if central_keyword_nodes.contains(&x) || central_keyword_nodes.contains(&y) {
                return true;
            }
            if !reach(x, central_keyword_nodes).contains(&y) {
                return true;
            }
        }
    }
    false
}

fn endpoints(graph: &KnowledgeGraph, edges: &BTreeSet<EdgeId>) -> BTreeSet<NodeId> {
    edges.iter().flat_map(|&e| [graph.edge_source(e), graph.edge_target(e)]).collect()
}

fn structure(graph: &KnowledgeGraph, nodes: &BTreeSet<NodeId>, edges: &BTreeSet<EdgeId>) -> StructureKey {
    StructureKey::new(graph, nodes.iter().copied(), edges.iter().copied())
}

/// Every central graph the engine can identify within `max_level`, in rank
/// order, before deduplication and truncation.
pub fn oracle_central_graphs(
    graph: &KnowledgeGraph,
    activations: &ActivationLevels,
    weights: &FineWeights,
    central: &[KeywordMatch],
    max_level: u32,
) -> Vec<CentralGraph> {
    let m = oracle_matrix(graph, activations, central, true, max_level);
    let mut out = Vec::new();
    for v in graph.nodes() {
        let Some(score) = m.join_level(v) else { continue };
        let mut edges = BTreeSet::new();
        for column in 0..central.len() {
            let sp = oracle_shortest_path_edges(graph, activations, &m, column, &[v])
                .expect("complete row");
            edges.extend(sp);
        }
        let mut nodes = endpoints(graph, &edges);
        nodes.insert(v);
        let central_keyword_nodes =
            nodes.iter().copied().filter(|&x| central.iter().any(|k| k.contains(x))).collect();
        out.push(CentralGraph {
            central_node: v,
            tie_break: tie_break_sum(edges.iter().map(|&e| weights.get(e))),
            nodes,
            edges,
            central_keyword_nodes,
            keyword_distances: m.row(v).to_vec(),
            score,
            level: score,
        });
    }
    rank_results(out)
}

/// Literal top-k construction: all central graphs, the best `beam` distinct
/// ones, their radial extensions, the pass-through filter, then the best `k`
/// distinct radial pattern graphs.
pub fn oracle_search(
    graph: &KnowledgeGraph,
    activations: &ActivationLevels,
    weights: &FineWeights,
    query: &ResolvedQuery,
    params: &SearchParams,
) -> Vec<QueryResult> {
    let cgs = oracle_central_graphs(graph, activations, weights, &query.central, params.max_level);
    let mut cgs = distinct_results(cgs, |cg| structure(graph, &cg.nodes, &cg.edges));
    cgs.truncate(params.beam);
    if query.marginal.is_empty() {
        return cgs.into_iter().take(params.topk).map(QueryResult::Central).collect();
    }
    let marginal = &query.marginal;
    let m = oracle_matrix(graph, activations, marginal, marginal.len() >= 2, params.max_level);
    let mut rpgs = Vec::new();
    for cg in cgs {
        let distances: Option<Vec<u32>> = (0..marginal.len())
            .map(|i| {
                let d = cg.central_keyword_nodes.iter().map(|&v| m.get(v, i)).min()?;
                (d != UNREACHED).then_some(d)
            })
            .collect();
        let Some(distances) = distances else { continue };
        let mut marginal_nodes = BTreeSet::new();
        let mut marginal_edges = BTreeSet::new();
        for (i, &d) in distances.iter().enumerate() {
            let starts: Vec<NodeId> =
                cg.central_keyword_nodes.iter().copied().filter(|&v| m.get(v, i) == d).collect();
            let sp = oracle_shortest_path_edges(graph, activations, &m, i, &starts)
                .expect("finite distance");
            marginal_nodes.extend(starts);
            marginal_nodes.extend(endpoints(graph, &sp));
            marginal_edges.extend(sp);
        }
        let nodes: BTreeSet<NodeId> = cg.nodes.union(&marginal_nodes).copied().collect();
        let edges: BTreeSet<EdgeId> = cg.edges.union(&marginal_edges).copied().collect();
        if !oracle_ptc(graph, &nodes, &edges, &cg.central_keyword_nodes, marginal) {
            continue;
        }
        let sm = marginal_score(&distances);
        rpgs.push(RadialPatternGraph {
            combined_score: rpg_score(f64::from(cg.score), f64::from(sm), &params.score),
            tie_break: tie_break_sum(edges.iter().map(|&e| weights.get(e))),
            base: cg,
            marginal_nodes,
            marginal_edges,
            marginal_distances: distances,
            marginal_score: sm,
            ptc: true,
        });
    }
    let mut rpgs = distinct_results(rank_results(rpgs), |r| structure(graph, &r.nodes(), &r.edges()));
    rpgs.truncate(params.topk);
    rpgs.into_iter().map(QueryResult::Radial).collect()
}
