#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use raks::search::{Engine, QueryResult, ResolvedQuery};
use raks::{ActivationLevels, FineWeights, KeywordMatch, KnowledgeGraph, NodeId, Triple};

pub struct Fixture {
    pub graph: KnowledgeGraph,
    pub activations: ActivationLevels,
    pub weights: FineWeights,
}

impl Fixture {
    pub fn engine(&self) -> Engine<'_> {
        Engine::new(&self.graph, &self.activations, &self.weights)
    }

    pub fn node(&self, name: &str) -> NodeId {
        self.graph.node_id(name).unwrap_or_else(|| panic!("no node {name}"))
    }

    pub fn keyword(&self, name: &str, nodes: &[&str]) -> KeywordMatch {
        KeywordMatch::new(name, nodes.iter().map(|n| self.node(n)))
    }
}

/// Builds a graph from `(src, dst, a_forward, a_inverse)` rows with a single
/// label, assigning activations by edge lookup.
pub fn fixture(rows: &[(&str, &str, u32, u32)]) -> Fixture {
    let triples: Vec<Triple> = rows.iter().map(|(s, d, ..)| Triple::new(*s, "L", *d)).collect();
    let graph = KnowledgeGraph::from_triples(&triples).unwrap();
    let mut acts = vec![0; graph.edge_count()];
    for e in graph.edges() {
        let (a_fwd, a_inv) = (rows[graph.edge_triple(e.id) as usize].2, rows[graph.edge_triple(e.id) as usize].3);
        acts[e.id as usize] = if e.inverse { a_inv } else { a_fwd };
    }
    let weights = FineWeights::from_raw(vec![1.0; graph.edge_count()]);
    Fixture { graph, activations: ActivationLevels(acts), weights }
}

/// k1 -(1)- v -(1)- k2 with m -(1)- k1.
pub fn five_node() -> Fixture {
    fixture(&[("k1", "v", 1, 1), ("v", "k2", 1, 1), ("m", "k1", 1, 1)])
}

/// Two disjoint two-edge routes from k to t.
pub fn diamond() -> Fixture {
    fixture(&[("k", "x", 0, 0), ("k", "y", 0, 0), ("x", "t", 0, 0), ("y", "t", 0, 0)])
}

pub fn random_fixture(rng: &mut ChaCha8Rng, nodes: usize, triples: usize, max_a: u32) -> Fixture {
    let labels = 1 + rng.random_range(0..4);
    let mut t = Vec::with_capacity(triples + nodes);
    // spanning path keeps most of the graph connected
    for v in 1..nodes {
        if rng.random_bool(0.8) {
            let u = rng.random_range(0..v);
            t.push(Triple::new(format!("n{u}"), format!("l{}", rng.random_range(0..labels)), format!("n{v}")));
        }
    }
    while t.len() < triples {
        let u = rng.random_range(0..nodes);
        let v = rng.random_range(0..nodes);
        t.push(Triple::new(format!("n{u}"), format!("l{}", rng.random_range(0..labels)), format!("n{v}")));
    }
    let graph = KnowledgeGraph::from_triples(&t).unwrap();
    let acts = (0..graph.edge_count()).map(|_| rng.random_range(0..=max_a)).collect();
    let raw = (0..graph.edge_count()).map(|_| rng.random::<f64>()).collect();
    Fixture { graph, activations: ActivationLevels(acts), weights: FineWeights::from_raw(raw) }
}

pub fn random_keywords(rng: &mut ChaCha8Rng, graph: &KnowledgeGraph, count: usize, prefix: &str) -> Vec<KeywordMatch> {
    (0..count)
        .map(|i| {
            let size = rng.random_range(1..=3).min(graph.node_count());
            let nodes = sample(rng, graph.node_count(), size).into_iter().map(|v| v as NodeId);
            KeywordMatch::new(format!("{prefix}{i}"), nodes)
        })
        .collect()
}

pub fn random_query(rng: &mut ChaCha8Rng, graph: &KnowledgeGraph, cknum: usize, mknum: usize) -> ResolvedQuery {
    ResolvedQuery {
        central: random_keywords(rng, graph, cknum, "c"),
        marginal: random_keywords(rng, graph, mknum, "m"),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Scores plus node and undirected edge sets, in rank order.
pub type Summary = Vec<(u64, u32, Option<u32>, BTreeSet<NodeId>, BTreeSet<u32>)>;

pub fn summarize(graph: &KnowledgeGraph, results: &[QueryResult]) -> Summary {
    results
        .iter()
        .map(|r| {
            let key = r.structure_key(graph);
            (
                r.primary_score().to_bits(),
                r.central_score(),
                r.marginal_score(),
                key.nodes.into_iter().collect(),
                key.undirected_edges.into_iter().collect(),
            )
        })
        .collect()
}
