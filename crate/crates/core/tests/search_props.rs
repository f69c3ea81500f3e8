mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use raks::metrics::{radial_pattern_ratio, uniqueness_ratio};
use raks::oracle::{
    exhaustive_distances, exhaustive_shortest_path_edges, oracle_distances, oracle_matrix, oracle_search,
    oracle_shortest_path_edges, OracleConfig,
};
use raks::search::{Phase, PhaseEnd, SearchState, INF};
use raks::{
    Combination, EdgeId, Query, QueryResult, RaksError, ResolvedQuery, ScoreParams, SearchParams, Termination,
};

fn params(k: usize) -> SearchParams {
    SearchParams { threads: 1, time_limit: None, ..SearchParams::default().with_topk(k) }
}

fn edge(f: &Fixture, a: &str, b: &str) -> EdgeId {
    let (a, b) = (f.node(a), f.node(b));
    f.graph.out_edges(a).find(|e| e.dst == b).map(|e| e.id).unwrap()
}

#[test]
fn five_node_example() {
    let f = five_node();
    let q = ResolvedQuery {
        central: vec![f.keyword("k1", &["k1"]), f.keyword("k2", &["k2"])],
        marginal: vec![f.keyword("m", &["m"])],
    };
    let out = f.engine().search(&q, &params(5)).unwrap();
    assert_eq!(out.results.len(), 1);
    let QueryResult::Radial(rpg) = &out.results[0] else { panic!("expected a radial result") };
    assert_eq!((rpg.base.score, rpg.marginal_score, rpg.combined_score), (2, 2, 2.0));
    assert_eq!(rpg.base.edges, BTreeSet::from([edge(&f, "k1", "v"), edge(&f, "k2", "v")]));
    assert_eq!(rpg.marginal_edges, BTreeSet::from([edge(&f, "m", "k1")]));
    assert_eq!(rpg.marginal_distances, vec![2]);
    assert!(rpg.ptc);
}

#[test]
fn diamond_keeps_both_routes() {
    let d = diamond();
    let q = ResolvedQuery { central: vec![d.keyword("t", &["t"])], marginal: vec![d.keyword("k", &["k"])] };
    let out = d.engine().search(&q, &params(5)).unwrap();
    let QueryResult::Radial(rpg) = &out.results[0] else { panic!("expected a radial result") };
    let expect = BTreeSet::from([edge(&d, "k", "x"), edge(&d, "k", "y"), edge(&d, "x", "t"), edge(&d, "y", "t")]);
    assert_eq!(rpg.marginal_edges, expect);
}

#[test]
fn symmetric_central_nodes_deduplicate() {
    let f = fixture(&[("k1", "k2", 0, 0)]);
    let q = ResolvedQuery { central: vec![f.keyword("a", &["k1"]), f.keyword("b", &["k2"])], marginal: vec![] };
    let out = f.engine().search(&q, &params(5)).unwrap();
    assert_eq!(out.results.len(), 1);
    assert_eq!(out.results[0].central_node(), f.node("k1"));
}

#[test]
fn beam_keeps_lowest_central_ids_among_ties() {
    let mut rows = Vec::new();
    let names: Vec<String> = (0..5).map(|i| format!("v{i}")).collect();
    for v in &names {
        rows.push(("k1", v.as_str(), 1, 1));
        rows.push((v.as_str(), "k2", 1, 1));
    }
    let f = fixture(&rows);
    let q = ResolvedQuery { central: vec![f.keyword("a", &["k1"]), f.keyword("b", &["k2"])], marginal: vec![] };
    let out = f.engine().search(&q, &params(3)).unwrap();
    let got: Vec<_> = out.results.iter().map(|r| r.central_node()).collect();
    let mut all: Vec<_> = names.iter().map(|n| f.node(n)).collect();
    all.sort();
    assert_eq!(got, all[..3]);
    assert!(out.results.iter().all(|r| r.central_score() == 2));
}

#[test]
fn unresolved_and_empty_queries() {
    assert!(matches!(Query::new(vec![], vec!["x".into()]), Err(RaksError::InvalidQuery(_))));
    let f = five_node();
    let q = ResolvedQuery { central: vec![], marginal: vec![] };
    assert!(f.engine().search(&q, &params(1)).is_err());
    let bad = SearchParams { beam: 0, ..params(1) };
    assert!(matches!(bad.validate(), Err(RaksError::InvalidParams(_))));
}

#[test]
fn max_level_cuts_search() {
    let f = fixture(&[("k1", "v", 5, 5), ("v", "k2", 5, 5)]);
    let q = ResolvedQuery { central: vec![f.keyword("a", &["k1"]), f.keyword("b", &["k2"])], marginal: vec![] };
    let out = f.engine().search(&q, &SearchParams { max_level: 5, ..params(1) }).unwrap();
    assert!(out.results.is_empty());
    assert_eq!(out.central.end, PhaseEnd::MaxLevel);
    assert!(!out.diagnostics.is_empty());
    let out = f.engine().search(&q, &SearchParams { max_level: 7, ..params(1) }).unwrap();
    assert_eq!(out.results[0].central_score(), 6);
}

/// Drives the level loop by hand and checks that no finite cell changes and
/// every new cell gets `level + 1`.
fn h_cells_written_once(f: &Fixture, q: &ResolvedQuery) -> Result<(), TestCaseError> {
    for (kws, phase) in [(&q.central, Phase::Central), (&q.marginal, Phase::Marginal)] {
        let mut state = SearchState::init(&f.graph, kws, phase).unwrap();
        loop {
            let frontiers = state.enqueue_frontiers();
            state.identify(&frontiers);
            if frontiers.is_empty() || state.level >= 30 {
                break;
            }
            let before = state.matrix.snapshot();
            state.expand_level(&f.graph, &f.activations, &frontiers);
            let after = state.matrix.snapshot();
            for (b, a) in before.iter().zip(&after) {
                if *b != INF {
                    prop_assert_eq!(a, b);
                } else if *a != INF {
                    prop_assert_eq!(*a, state.level + 1);
                }
            }
            state.level += 1;
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_cells_written_once(seed in any::<u64>(), ck in 1usize..4, mk in 1usize..4) {
        let mut r = rng(seed);
        let f = random_fixture(&mut r, 50, 120, 5);
        let q = random_query(&mut r, &f.graph, ck, mk);
        h_cells_written_once(&f, &q)?;
    }

    #[test]
    fn output_independent_of_threads(seed in any::<u64>(), ck in 1usize..4, mk in 0usize..4) {
        let mut r = rng(seed);
        let f = random_fixture(&mut r, 80, 250, 5);
        let q = random_query(&mut r, &f.graph, ck, mk);
        let one = f.engine().search(&q, &params(5)).unwrap();
        for threads in [2, 4] {
            let many = f.engine().search(&q, &SearchParams { threads, ..params(5) }).unwrap();
            prop_assert_eq!(&one.results, &many.results);
        }
    }

    #[test]
    fn results_pass_ptc_and_are_unique(seed in any::<u64>(), ck in 1usize..4, mk in 1usize..5) {
        let mut r = rng(seed);
        let f = random_fixture(&mut r, 60, 150, 4);
        let q = random_query(&mut r, &f.graph, ck, mk);
        let out = f.engine().search(&q, &params(10)).unwrap();
        prop_assert_eq!(radial_pattern_ratio(&f.graph, &out.results, &q.marginal), 1.0);
        prop_assert_eq!(uniqueness_ratio(&f.graph, &out.results), 1.0);
        for w in out.results.windows(2) {
            prop_assert!(w[0].primary_score() <= w[1].primary_score());
        }
    }

    #[test]
    fn inequality_termination_matches_oracle(seed in any::<u64>(), ck in 1usize..3, mk in 1usize..4, k in 1usize..6) {
        let mut r = rng(seed);
        let f = random_fixture(&mut r, 60, 150, 5);
        let q = random_query(&mut r, &f.graph, ck, mk);
        let p = SearchParams { termination: Termination::Inequality, ..params(k) };
        let got = f.engine().search(&q, &p).unwrap();
        let want = oracle_search(&f.graph, &f.activations, &f.weights, &q, &p);
        prop_assert_eq!(summarize(&f.graph, &got.results), summarize(&f.graph, &want));
    }

    #[test]
    fn multiplicative_combination_matches_oracle(seed in any::<u64>(), mk in 1usize..4, gamma in 0.0f64..1.0) {
        let mut r = rng(seed);
        let f = random_fixture(&mut r, 60, 150, 5);
        let q = random_query(&mut r, &f.graph, 2, mk);
        let score = ScoreParams::new(gamma, Combination::Multiplicative).unwrap();
        let p = SearchParams { score, ..params(4) };
        let got = f.engine().search(&q, &p).unwrap();
        let want = oracle_search(&f.graph, &f.activations, &f.weights, &q, &p);
        prop_assert_eq!(summarize(&f.graph, &got.results), summarize(&f.graph, &want));
    }

    #[test]
    fn exhaustive_and_dijkstra_oracles_agree(seed in any::<u64>(), limit in 3usize..9) {
        let mut r = rng(seed);
        let f = random_fixture(&mut r, 14, 24, 3);
        let kws = random_keywords(&mut r, &f.graph, 1, "k");
        let sources = &kws[0].nodes;
        let cfg = OracleConfig::new(limit, false).unwrap();
        let d = oracle_distances(&f.graph, &f.activations, sources);
        let ex = exhaustive_distances(&f.graph, &f.activations, sources, &cfg);
        let m = oracle_matrix(&f.graph, &f.activations, &kws, false, 1000);
        for v in f.graph.nodes() {
            let (dv, ev) = (d[v as usize], ex[v as usize]);
            prop_assert!(ev >= dv);
            prop_assert_eq!(m.get(v, 0), dv);
            if dv as usize <= limit {
                prop_assert_eq!(ev, dv, "node {}", v);
                let paths = exhaustive_shortest_path_edges(&f.graph, &f.activations, sources, v, &cfg);
                let tight = oracle_shortest_path_edges(&f.graph, &f.activations, &m, 0, &[v]).unwrap();
                prop_assert_eq!(paths, tight, "node {}", v);
            }
        }
    }
}
