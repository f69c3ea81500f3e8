//! Pass Through Constraint check on a recovered radial pattern graph.
//!
//! With one marginal keyword the constraint only asks that a marginal keyword
//! node be connected to the central keyword nodes `V_C`. Otherwise two distinct
//! marginal keyword nodes must exist whose every undirected connection inside
//! the result touches `V_C`: either one of them lies in `V_C`, or they fall in
//! different components once `V_C` is removed.

use std::collections::{BTreeSet, HashMap};

use crate::graph::{KnowledgeGraph, NodeId};
use crate::text::KeywordMatch;

use super::result::RadialPatternGraph;

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

pub fn check_ptc(rpg: &RadialPatternGraph, graph: &KnowledgeGraph, marginal: &[KeywordMatch]) -> bool {
    let nodes = rpg.nodes();
    let edges = rpg.edges();
    let vc = &rpg.base.central_keyword_nodes;
    let marginal_nodes: BTreeSet<NodeId> =
        nodes.iter().copied().filter(|&v| marginal.iter().any(|k| k.contains(v))).collect();

    let index: HashMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let endpoints = edges.iter().map(|&e| {
        let r = graph.edge(e);
        (index[&r.src], index[&r.dst], r.src, r.dst)
    });

    if marginal.len() <= 1 {
        let mut sets = DisjointSet::new(nodes.len());
        for (a, b, ..) in endpoints {
            sets.union(a, b);
        }
        let vc_roots: BTreeSet<usize> = vc.iter().map(|v| sets.find(index[v])).collect();
        return marginal_nodes.iter().any(|v| vc_roots.contains(&sets.find(index[v])));
    }

    if marginal_nodes.len() < 2 {
        return false;
    }
    if marginal_nodes.iter().any(|v| vc.contains(v)) {
        return true;
    }
    let mut sets = DisjointSet::new(nodes.len());
    for (a, b, src, dst) in endpoints {
        if !vc.contains(&src) && !vc.contains(&dst) {
            sets.union(a, b);
        }
    }
    let roots: BTreeSet<usize> = marginal_nodes.iter().map(|v| sets.find(index[v])).collect();
    roots.len() >= 2
}
