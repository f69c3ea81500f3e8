use std::collections::BTreeSet;

use crate::graph::{EdgeId, KnowledgeGraph, NodeId};
use crate::ranking::{RankKey, Ranked};

/// Subgraph anchored at a central node: the union of all shortest paths from
/// each central keyword to that node.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralGraph {
    pub central_node: NodeId,
    pub nodes: BTreeSet<NodeId>,
    pub edges: BTreeSet<EdgeId>,
    /// Nodes of the graph containing at least one central keyword.
    pub central_keyword_nodes: BTreeSet<NodeId>,
    /// Distance from each central keyword to the central node.
    pub keyword_distances: Vec<u32>,
    pub score: u32,
    /// Sum of fine weights over `edges`.
    pub tie_break: f64,
    /// Global level at which the central node was identified.
    pub level: u32,
}

/// A central graph extended with the shortest paths from each marginal
/// keyword to its central keyword nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPatternGraph {
    pub base: CentralGraph,
    pub marginal_nodes: BTreeSet<NodeId>,
    pub marginal_edges: BTreeSet<EdgeId>,
    /// Distance from each marginal keyword to the central keyword nodes.
    pub marginal_distances: Vec<u32>,
    pub marginal_score: u32,
    pub combined_score: f64,
    /// Sum of fine weights over the union of central and marginal edges.
    pub tie_break: f64,
    pub ptc: bool,
}

impl RadialPatternGraph {
    pub fn nodes(&self) -> BTreeSet<NodeId> {
        self.base.nodes.union(&self.marginal_nodes).copied().collect()
    }

    pub fn edges(&self) -> BTreeSet<EdgeId> {
        self.base.edges.union(&self.marginal_edges).copied().collect()
    }
}

/// Identity of a result ignoring edge direction and central node choice.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StructureKey {
    pub nodes: Vec<NodeId>,
    /// Triple indices; an edge and its inverse map to the same one.
    pub undirected_edges: Vec<u32>,
}

impl StructureKey {
    pub fn new(
        graph: &KnowledgeGraph,
        nodes: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = EdgeId>,
    ) -> Self {
        let nodes: BTreeSet<NodeId> = nodes.into_iter().collect();
        let triples: BTreeSet<u32> = edges.into_iter().map(|e| graph.edge_triple(e)).collect();
        Self { nodes: nodes.into_iter().collect(), undirected_edges: triples.into_iter().collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueryResult {
    Central(CentralGraph),
    Radial(RadialPatternGraph),
}

impl QueryResult {
    pub fn central(&self) -> &CentralGraph {
        match self {
            QueryResult::Central(cg) => cg,
            QueryResult::Radial(rpg) => &rpg.base,
        }
    }

    pub fn central_node(&self) -> NodeId {
        self.central().central_node
    }

    pub fn nodes(&self) -> BTreeSet<NodeId> {
        match self {
            QueryResult::Central(cg) => cg.nodes.clone(),
            QueryResult::Radial(rpg) => rpg.nodes(),
        }
    }

    pub fn edges(&self) -> BTreeSet<EdgeId> {
        match self {
            QueryResult::Central(cg) => cg.edges.clone(),
            QueryResult::Radial(rpg) => rpg.edges(),
        }
    }

    pub fn central_score(&self) -> u32 {
        self.central().score
    }

    pub fn marginal_score(&self) -> Option<u32> {
        match self {
            QueryResult::Central(_) => None,
            QueryResult::Radial(rpg) => Some(rpg.marginal_score),
        }
    }

    /// Combined score for radial results, central score otherwise.
    pub fn primary_score(&self) -> f64 {
        match self {
            QueryResult::Central(cg) => f64::from(cg.score),
            QueryResult::Radial(rpg) => rpg.combined_score,
        }
    }

    pub fn tie_break(&self) -> f64 {
        match self {
            QueryResult::Central(cg) => cg.tie_break,
            QueryResult::Radial(rpg) => rpg.tie_break,
        }
    }

    pub fn ptc(&self) -> Option<bool> {
        match self {
            QueryResult::Central(_) => None,
            QueryResult::Radial(rpg) => Some(rpg.ptc),
        }
    }

    pub fn structure_key(&self, graph: &KnowledgeGraph) -> StructureKey {
        StructureKey::new(graph, self.nodes(), self.edges())
    }
}

impl Ranked for CentralGraph {
    fn rank_key(&self) -> RankKey {
        RankKey { primary: f64::from(self.score), tie_break: self.tie_break, central: self.central_node }
    }
}

impl Ranked for RadialPatternGraph {
    fn rank_key(&self) -> RankKey {
        RankKey {
            primary: self.combined_score,
            tie_break: self.tie_break,
            central: self.base.central_node,
        }
    }
}

impl Ranked for QueryResult {
    fn rank_key(&self) -> RankKey {
        match self {
            QueryResult::Central(cg) => cg.rank_key(),
            QueryResult::Radial(rpg) => rpg.rank_key(),
        }
    }
}
