use std::collections::BTreeSet;

use proptest::prelude::*;
use raks::graph::parse_triples;
use raks::store::{read_index, write_index, IndexBundle};
use raks::text::tokenize;
use raks::weighting::HopSampling;
use raks::{KnowledgeGraph, NodeTextIndex, RaksError, Triple};

fn triples_strategy(max_nodes: usize, max_triples: usize) -> impl Strategy<Value = Vec<Triple>> {
    prop::collection::vec((0..max_nodes, 0..3usize, 0..max_nodes), 0..max_triples).prop_map(|v| {
        v.into_iter().map(|(u, l, w)| Triple::new(format!("n{u}"), format!("l{l}"), format!("n{w}"))).collect()
    })
}

proptest! {
    #[test]
    fn reverse_adjacency_is_transpose(triples in triples_strategy(30, 120)) {
        let g = KnowledgeGraph::from_triples(&triples).unwrap();
        let mut forward = Vec::new();
        let mut reverse = Vec::new();
        for v in g.nodes() {
            for e in g.out_edges(v) {
                forward.push((e.src, e.dst, e.label, e.inverse));
            }
            for e in g.in_edges(v) {
                prop_assert_eq!(e.dst, v);
                reverse.push((e.src, e.dst, e.label, e.inverse));
            }
            prop_assert_eq!(g.in_sources(v).len(), g.in_edge_ids(v).len());
        }
        forward.sort_unstable();
        reverse.sort_unstable();
        prop_assert_eq!(forward, reverse);
    }

    #[test]
    fn every_triple_appears_in_both_directions(triples in triples_strategy(30, 120)) {
        let g = KnowledgeGraph::from_triples(&triples).unwrap();
        prop_assert_eq!(g.edge_count(), 2 * triples.len());
        let mut seen = vec![(0, 0); triples.len()];
        for e in g.edges() {
            let t = &triples[g.edge_triple(e.id) as usize];
            let (src, dst) = if e.inverse { (&t.dst, &t.src) } else { (&t.src, &t.dst) };
            prop_assert_eq!(g.node_name(e.src), src.as_str());
            prop_assert_eq!(g.node_name(e.dst), dst.as_str());
            prop_assert_eq!(g.label_name(e.label), t.label.as_str());
            let slot = &mut seen[g.edge_triple(e.id) as usize];
            if e.inverse { slot.1 += 1 } else { slot.0 += 1 }
        }
        prop_assert!(seen.iter().all(|&s| s == (1, 1)));
        prop_assert!(g.nodes().all(|v| (v as usize) < g.node_count()));
    }

    #[test]
    fn lookup_equals_brute_force_scan(
        texts in prop::collection::vec(prop::collection::vec(0..12usize, 0..5), 1..200),
        query in prop::collection::vec(0..12usize, 1..3),
    ) {
        let words = ["usa", "trade", "Lee", "kuan", "yew", "asia-pacific", "ASIA", "pacific", "x1", "war", "Peace", "of"];
        let node_texts: Vec<(u32, String)> = texts
            .iter()
            .enumerate()
            .map(|(i, ws)| (i as u32, ws.iter().map(|&w| words[w]).collect::<Vec<_>>().join(" ")))
            .collect();
        let index = NodeTextIndex::build(texts.len(), &node_texts).unwrap();
        let keyword = query.iter().map(|&w| words[w]).collect::<Vec<_>>().join(" ");
        let want_tokens: BTreeSet<String> = tokenize(&keyword).into_iter().collect();
        let expect: Vec<u32> = node_texts
            .iter()
            .filter(|(_, t)| {
                let have: BTreeSet<String> = tokenize(t).into_iter().collect();
                want_tokens.is_subset(&have)
            })
            .map(|(v, _)| *v)
            .collect();
        match index.lookup(&keyword) {
            Ok(m) => prop_assert_eq!(m.nodes, expect),
            Err(RaksError::KeywordUnresolved(_)) => prop_assert!(expect.is_empty()),
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }

    #[test]
    fn postings_sorted_and_unique(texts in prop::collection::vec("[a-cA-C ,.-]{0,12}", 1..60)) {
        let node_texts: Vec<(u32, String)> = texts.iter().cloned().enumerate().map(|(i, t)| (i as u32, t)).collect();
        let index = NodeTextIndex::build(texts.len(), &node_texts).unwrap();
        for (_, t) in &node_texts {
            for token in tokenize(t) {
                prop_assert_eq!(token.to_lowercase(), token.clone());
                let p = index.posting(&token);
                prop_assert!(p.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(p.iter().all(|&v| (v as usize) < texts.len()));
            }
        }
    }

    #[test]
    fn index_round_trip(triples in triples_strategy(20, 60)) {
        prop_assume!(triples.iter().any(|t| t.src != t.dst));
        let bundle = IndexBundle::build(
            &triples,
            |g| Ok(g.nodes().map(|v| (v, format!("text {}", g.node_name(v)))).collect()),
            0.5,
            HopSampling::Random { pairs: 50, seed: 1 },
        );
        let Ok(bundle) = bundle else { return Ok(()) };
        let mut bytes = Vec::new();
        write_index(&mut bytes, &bundle).unwrap();
        prop_assert_eq!(read_index(&bytes).unwrap(), bundle);
    }
}

#[test]
fn parse_reports_line_numbers() {
    let input = "# comment\na\tL\tb\n\nc\tL\n";
    match parse_triples(input.as_bytes()) {
        Err(RaksError::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
    let ok = parse_triples("a\tL\tb\n# x\nb\tM\tc\n".as_bytes()).unwrap();
    assert_eq!(ok, vec![Triple::new("a", "L", "b"), Triple::new("b", "M", "c")]);
}

#[test]
fn duplicate_triples_kept() {
    let t = Triple::new("a", "L", "b");
    let g = KnowledgeGraph::from_triples(&[t.clone(), t]).unwrap();
    assert_eq!(g.out_degree(0), 2);
    assert_eq!(g.edge_count(), 4);
}
