mod common;

use common::*;
use raks::oracle::{oracle_matrix, oracle_search, oracle_shortest_path_edges};
use raks::search::{recover_cg, recover_rpg, Phase, SearchParams};

#[test]
fn matrix_matches_oracle_on_random_graphs() {
    for seed in 0..40 {
        let mut r = rng(seed);
        let f = random_fixture(&mut r, 60, 200, 6);
        for (count, phase) in [(1, Phase::Central), (3, Phase::Central), (1, Phase::Marginal), (3, Phase::Marginal)] {
            let kws = random_keywords(&mut r, &f.graph, count, "k");
            let (state, joined) = f.engine().explore_all(&kws, phase, 20).unwrap();
            let blocking = state.join_enabled();
            let m = oracle_matrix(&f.graph, &f.activations, &kws, blocking, 20);
            assert_eq!(state.matrix.snapshot(), m.cells(), "seed {seed} count {count} {phase:?}");
            for j in &joined {
                assert_eq!(j.score, j.level, "seed {seed}");
            }
        }
    }
}

#[test]
fn recovered_edges_match_oracle() {
    for seed in 0..40 {
        let mut r = rng(100 + seed);
        let f = random_fixture(&mut r, 40, 120, 4);
        let central = random_keywords(&mut r, &f.graph, 2, "c");
        let marginal = random_keywords(&mut r, &f.graph, 2, "m");
        let (state, joined) = f.engine().explore_all(&central, Phase::Central, 20).unwrap();
        let m = oracle_matrix(&f.graph, &f.activations, &central, true, 20);
        let (mstate, _) = f.engine().explore_all(&marginal, Phase::Marginal, 20).unwrap();
        let mm = oracle_matrix(&f.graph, &f.activations, &marginal, true, 20);
        for stub in joined {
            let cg = recover_cg(&f.graph, &f.activations, &f.weights, &state, &central, stub).unwrap();
            let mut expect = std::collections::BTreeSet::new();
            for col in 0..central.len() {
                expect.extend(oracle_shortest_path_edges(&f.graph, &f.activations, &m, col, &[stub.node]).unwrap());
            }
            assert_eq!(cg.edges, expect, "seed {seed} node {}", stub.node);
            if let Ok(rpg) = recover_rpg(&f.graph, &f.activations, &f.weights, &mstate, &cg, &Default::default()) {
                let mut expect = std::collections::BTreeSet::new();
                for (col, &d) in rpg.marginal_distances.iter().enumerate() {
                    let starts: Vec<_> = cg.central_keyword_nodes.iter().copied().filter(|&v| mm.get(v, col) == d).collect();
                    expect.extend(oracle_shortest_path_edges(&f.graph, &f.activations, &mm, col, &starts).unwrap());
                }
                assert_eq!(rpg.marginal_edges, expect, "seed {seed}");
            }
        }
    }
}

#[test]
fn search_matches_oracle_search() {
    let mut nonempty = 0;
    for seed in 0..30 {
        let mut r = rng(1000 + seed);
        let f = random_fixture(&mut r, 80, 200, 6);
        for (ck, mk) in [(1, 1), (2, 2), (2, 4)] {
            for k in [1, 5] {
                let q = random_query(&mut r, &f.graph, ck, mk);
                let params = SearchParams { threads: 1, time_limit: None, ..SearchParams::default().with_topk(k) };
                let got = f.engine().search(&q, &params).unwrap();
                let want = oracle_search(&f.graph, &f.activations, &f.weights, &q, &params);
                assert_eq!(summarize(&f.graph, &got.results), summarize(&f.graph, &want), "seed {seed} ({ck},{mk}) k={k}");
                nonempty += usize::from(!want.is_empty());
            }
        }
    }
    println!("{nonempty} of 180 queries returned results");
    assert!(nonempty > 90);
}
