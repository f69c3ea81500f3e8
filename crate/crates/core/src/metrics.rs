//! Effectiveness checkers for a returned top-k list: how many results are true
//! radial patterns, and how many are unique.

use std::collections::{BTreeSet, HashSet};

use crate::graph::KnowledgeGraph;
use crate::search::{check_ptc, QueryResult};
use crate::text::KeywordMatch;

/// Share of results that pass the pass-through check. Central-only results
/// count as passing; an empty list gives 1.
pub fn radial_pattern_ratio(
    graph: &KnowledgeGraph,
    results: &[QueryResult],
    marginal: &[KeywordMatch],
) -> f64 {
    if results.is_empty() {
        return 1.0;
    }
    let passing = results
        .iter()
        .filter(|r| match r {
            QueryResult::Central(_) => true,
            QueryResult::Radial(rpg) => check_ptc(rpg, graph, marginal),
        })
        .count();
    passing as f64 / results.len() as f64
}

/// Share of results whose node set and undirected edge set are not repeated
/// by an earlier result.
pub fn uniqueness_ratio(graph: &KnowledgeGraph, results: &[QueryResult]) -> f64 {
    if results.is_empty() {
        return 1.0;
    }
    let distinct: HashSet<_> = results.iter().map(|r| r.structure_key(graph)).collect();
    distinct.len() as f64 / results.len() as f64
}

fn jaccard(a: &BTreeSet<u32>, b: &BTreeSet<u32>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Index pairs `(i, j)`, `i < j`, whose undirected edge sets overlap with
/// Jaccard similarity at least `threshold`.
pub fn near_duplicates(
    graph: &KnowledgeGraph,
    results: &[QueryResult],
    threshold: f64,
) -> Vec<(usize, usize)> {
    let sets: Vec<BTreeSet<u32>> = results
        .iter()
        .map(|r| r.structure_key(graph).undirected_edges.into_iter().collect())
        .collect();
    let mut out = Vec::new();
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if jaccard(&sets[i], &sets[j]) >= threshold {
                out.push((i, j));
            }
        }
    }
    out
}

/// Drops every result that nearly duplicates a better-ranked one.
pub fn filter_near_duplicates(
    graph: &KnowledgeGraph,
    results: Vec<QueryResult>,
    threshold: f64,
) -> Vec<QueryResult> {
    let dropped: HashSet<usize> =
        near_duplicates(graph, &results, threshold).into_iter().map(|(_, j)| j).collect();
    results.into_iter().enumerate().filter(|(i, _)| !dropped.contains(i)).map(|(_, r)| r).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jaccard_edges() {
        let a = BTreeSet::from([1, 2, 3]);
        let b = BTreeSet::from([2, 3, 4]);
        assert_eq!(jaccard(&a, &b), 0.5);
        assert_eq!(jaccard(&BTreeSet::new(), &BTreeSet::new()), 1.0);
    }
}
