//! Fine-grained edge weights, average hop estimation, and coarsening of
//! weights into integer edge activation levels.
//!
//! Raw weight of a directed edge `i -> j` with label class `c` (label id plus
//! inverse flag) is `ln(out_c(i) + in_c(j))`, where `out_c(i)` counts the
//! out-edges of `i` in class `c` and `in_c(j)` the in-edges of `j` in class `c`.
//! Raw weights are min-max rescaled into `[0, 1]`; a graph whose raw weights are
//! all equal rescales to all zeros.
//!
//! Coarsening rewards edges lighter than `alpha` and penalizes heavier ones
//! around the average hop distance `avg_hops`:
//!
//! ```text
//! a = round(avg - avg * (alpha - w) / alpha)        if w <= alpha
//! a = round(avg + avg * (w - alpha) / (1 - alpha))  otherwise
//! ```
//!
//! with `round` meaning half-up rounding, so every level lies in
//! `[0, round(2 * avg)]`.

use std::collections::{HashMap, VecDeque};
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{RaksError, Result};
use crate::graph::{EdgeId, KnowledgeGraph, LabelId, NodeId};

/// Half-up rounding to the nearest integer.
#[inline]
pub fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FineWeights {
    /// `ln(count)` before rescaling, indexed by forward edge id.
    pub raw: Vec<f64>,
    /// Rescaled weights in `[0, 1]`.
    pub scaled: Vec<f64>,
}

impl FineWeights {
    #[inline]
    pub fn get(&self, e: EdgeId) -> f64 {
        self.scaled[e as usize]
    }

    pub fn len(&self) -> usize {
        self.scaled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaled.is_empty()
    }

    /// Builds from raw values, applying the min-max rescale.
    pub fn from_raw(raw: Vec<f64>) -> Self {
        let (min, max) = raw
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &w| (lo.min(w), hi.max(w)));
        let span = max - min;
        let scaled = if raw.is_empty() || span <= 0.0 {
            vec![0.0; raw.len()]
        } else {
            raw.iter().map(|&w| ((w - min) / span).clamp(0.0, 1.0)).collect()
        };
        Self { raw, scaled }
    }
}

type LabelClass = (LabelId, bool);

pub fn compute_fine_weights(graph: &KnowledgeGraph) -> FineWeights {
    let n = graph.node_count() as NodeId;

    // Same-class out-degree of each edge's source.
    let out_counts: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|v| {
            let mut per_class: HashMap<LabelClass, u32> = HashMap::new();
            for e in graph.out_edges(v) {
                *per_class.entry((e.label, e.inverse)).or_default() += 1;
            }
            graph.out_edges(v).map(|e| per_class[&(e.label, e.inverse)]).collect()
        })
        .collect();

    // Same-class in-degree of each edge's target, keyed by edge id.
    let mut in_count = vec![0u32; graph.edge_count()];
    let per_node: Vec<Vec<(EdgeId, u32)>> = (0..n)
        .into_par_iter()
        .map(|v| {
            let mut per_class: HashMap<LabelClass, u32> = HashMap::new();
            for e in graph.in_edges(v) {
                *per_class.entry((e.label, e.inverse)).or_default() += 1;
            }
            graph.in_edges(v).map(|e| (e.id, per_class[&(e.label, e.inverse)])).collect()
        })
        .collect();
    for (e, c) in per_node.into_iter().flatten() {
        in_count[e as usize] = c;
    }

    let raw: Vec<f64> = out_counts
        .into_iter()
        .flatten()
        .zip(in_count)
        .map(|(a, b)| f64::from(a + b).ln())
        .collect();
    FineWeights::from_raw(raw)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopStats {
    pub mean: f64,
    pub stddev: f64,
    /// Number of connected pairs the statistics were taken over.
    pub pairs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopSampling {
    /// `pairs` random ordered pairs from a seeded generator. Disconnected or
    /// identical draws are retried within a budget of ten draws per pair.
    Random { pairs: usize, seed: u64 },
    /// Every ordered pair of distinct connected nodes.
    Exhaustive,
}

/// Reusable scratch space for bidirectional hop searches.
struct BiBfs {
    dist_s: Vec<u32>,
    dist_t: Vec<u32>,
    touched: Vec<NodeId>,
}

const UNSEEN: u32 = u32::MAX;

impl BiBfs {
    fn new(n: usize) -> Self {
        Self { dist_s: vec![UNSEEN; n], dist_t: vec![UNSEEN; n], touched: Vec::new() }
    }

    /// Unweighted hop distance ignoring direction. The forward adjacency
    /// already holds an inverse for every edge, so it is symmetric.
    fn distance(&mut self, g: &KnowledgeGraph, s: NodeId, t: NodeId) -> Option<u32> {
        if s == t {
            return Some(0);
        }
        let mut front_s = vec![s];
        let mut front_t = vec![t];
        self.dist_s[s as usize] = 0;
        self.dist_t[t as usize] = 0;
        self.touched.extend([s, t]);
        let mut best: Option<u32> = None;
        while best.is_none() && !front_s.is_empty() && !front_t.is_empty() {
            let from_s = front_s.len() <= front_t.len();
            let (front, mine, theirs) = if from_s {
                (&mut front_s, &mut self.dist_s, &self.dist_t)
            } else {
                (&mut front_t, &mut self.dist_t, &self.dist_s)
            };
            let mut next = Vec::new();
            for &u in front.iter() {
                let du = mine[u as usize];
                for e in g.out_edge_ids(u) {
                    let x = g.edge_target(e);
                    if theirs[x as usize] != UNSEEN {
                        let d = du + 1 + theirs[x as usize];
                        best = Some(best.map_or(d, |b| b.min(d)));
                    }
                    if mine[x as usize] == UNSEEN {
                        mine[x as usize] = du + 1;
                        self.touched.push(x);
                        next.push(x);
                    }
                }
            }
            *front = next;
        }
        for &v in &self.touched {
            self.dist_s[v as usize] = UNSEEN;
            self.dist_t[v as usize] = UNSEEN;
        }
        self.touched.clear();
        best
    }
}

fn single_source_hops(g: &KnowledgeGraph, s: NodeId) -> Vec<u32> {
    let mut dist = vec![UNSEEN; g.node_count()];
    let mut queue = VecDeque::from([s]);
    dist[s as usize] = 0;
    while let Some(u) = queue.pop_front() {
        for e in g.out_edge_ids(u) {
            let x = g.edge_target(e) as usize;
            if dist[x] == UNSEEN {
                dist[x] = dist[u as usize] + 1;
                queue.push_back(x as NodeId);
            }
        }
    }
    dist
}

fn summarize(samples: &[u32]) -> HopStats {
    let n = samples.len() as f64;
    let mean = samples.iter().map(|&d| f64::from(d)).sum::<f64>() / n;
    let var = samples.iter().map(|&d| (f64::from(d) - mean).powi(2)).sum::<f64>() / n;
    HopStats { mean, stddev: var.sqrt(), pairs: samples.len() }
}

pub fn estimate_avg_hops(graph: &KnowledgeGraph, sampling: HopSampling) -> Result<HopStats> {
    let n = graph.node_count();
    if n == 0 {
        return Err(RaksError::InvalidParams("cannot estimate hops on an empty graph".into()));
    }
    match sampling {
        HopSampling::Exhaustive => {
            let samples: Vec<u32> = (0..n as NodeId)
                .into_par_iter()
                .flat_map_iter(|s| {
                    single_source_hops(graph, s)
                        .into_iter()
                        .enumerate()
                        .filter(move |&(t, d)| t != s as usize && d != UNSEEN)
                        .map(|(_, d)| d)
                })
                .collect();
            if samples.is_empty() {
                return Err(RaksError::NoConnectedPair { attempts: n * n });
            }
            Ok(summarize(&samples))
        }
        HopSampling::Random { pairs, seed } => {
            if pairs == 0 {
                return Err(RaksError::InvalidParams("sample_pairs must be positive".into()));
            }
            let budget = pairs.saturating_mul(10);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut samples = Vec::with_capacity(pairs);
            let mut attempts = 0usize;
            while samples.len() < pairs && attempts < budget {
                let want = (pairs - samples.len()).min(budget - attempts);
                let batch: Vec<(NodeId, NodeId)> = (0..want)
                    .map(|_| (rng.random_range(0..n) as NodeId, rng.random_range(0..n) as NodeId))
                    .collect();
                attempts += batch.len();
                let found: Vec<Option<u32>> = batch
                    .par_iter()
                    .map_init(
                        || BiBfs::new(n),
                        |bfs, &(s, t)| if s == t { None } else { bfs.distance(graph, s, t) },
                    )
                    .collect();
                samples.extend(found.into_iter().flatten());
            }
            if samples.is_empty() {
                return Err(RaksError::NoConnectedPair { attempts });
            }
            Ok(summarize(&samples))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarseningParams {
    alpha: f64,
    avg_hops: f64,
}

impl CoarseningParams {
    pub fn new(alpha: f64, avg_hops: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(RaksError::InvalidParams(format!("alpha must lie in (0,1), got {alpha}")));
        }
        if !(avg_hops > 0.0 && avg_hops.is_finite()) {
            return Err(RaksError::InvalidParams(format!("avg_hops must be positive, got {avg_hops}")));
        }
        Ok(Self { alpha, avg_hops })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn avg_hops(&self) -> f64 {
        self.avg_hops
    }

    /// `round(avg_hops)`, the level an edge of weight exactly `alpha` gets.
    pub fn pivot_level(&self) -> u32 {
        round_half_up(self.avg_hops) as u32
    }

    /// `round(2 * avg_hops)`, the largest possible level.
    pub fn max_level(&self) -> u32 {
        round_half_up(2.0 * self.avg_hops) as u32
    }

    pub fn activation_level(&self, w: f64) -> u32 {
        let avg = self.avg_hops;
        let x = if w <= self.alpha {
            avg - avg * (self.alpha - w) / self.alpha
        } else {
            avg + avg * (w - self.alpha) / (1.0 - self.alpha)
        };
        round_half_up(x).max(0) as u32
    }
}

/// Integer activation level per forward edge id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActivationLevels(pub Vec<u32>);

impl ActivationLevels {
    #[inline]
    pub fn get(&self, e: EdgeId) -> u32 {
        self.0[e as usize]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

pub fn coarsen(weights: &FineWeights, params: &CoarseningParams) -> ActivationLevels {
    ActivationLevels(weights.scaled.iter().map(|&w| params.activation_level(w)).collect())
}

/// Interval `[lo, hi)` the fine weight of an edge at level `a` must lie in.
pub fn bound_fine_weight(a: u32, params: &CoarseningParams) -> Result<Range<f64>> {
    let max = params.max_level();
    if a > max {
        return Err(RaksError::LevelOutOfRange { level: a, max });
    }
    let alpha = params.alpha;
    let avg = params.avg_hops;
    let af = f64::from(a);
    let reward_lo = alpha * (af - 0.5) / avg;
    let reward_hi = alpha * (af + 0.5) / avg;
    let penalty_lo = 1.0 + (af - 0.5 - 2.0 * avg) * (1.0 - alpha) / avg;
    let penalty_hi = 1.0 + (af + 0.5 - 2.0 * avg) * (1.0 - alpha) / avg;
    let pivot = params.pivot_level();
    Ok(match a.cmp(&pivot) {
        std::cmp::Ordering::Less => reward_lo..reward_hi,
        std::cmp::Ordering::Equal => reward_lo..penalty_hi,
        std::cmp::Ordering::Greater => penalty_lo..penalty_hi,
    })
}

/// Upper bound on the summed fine weights of a path with `length` nodes and
/// coarse score `coarse_score`, taking each edge at its largest feasible
/// level `score - (length - 1) .. score - 1`, capped at the maximum level.
pub fn upper_bound_path_score(
    length: usize,
    coarse_score: u32,
    params: &CoarseningParams,
) -> Result<f64> {
    let infeasible = RaksError::InfeasiblePath { length, score: coarse_score };
    if length == 0 {
        return Err(infeasible);
    }
    let edges = (length - 1) as u64;
    let score = u64::from(coarse_score);
    let cap = u64::from(params.max_level());
    if score < edges || (edges > 0 && score > cap + edges) || (edges == 0 && score != 0) {
        return Err(infeasible);
    }
    let mut total = 0.0;
    for k in (1..=edges).rev() {
        let level = (score - k).min(cap) as u32;
        total += bound_fine_weight(level, params)?.end;
    }
    Ok(total)
}

/// Equal-width histogram of values in `[0, 1]`.
pub fn histogram(values: &[f64], bins: usize) -> Vec<usize> {
    let mut out = vec![0usize; bins.max(1)];
    let last = out.len() - 1;
    for &v in values {
        let b = ((v.clamp(0.0, 1.0) * out.len() as f64) as usize).min(last);
        out[b] += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Triple;

    fn graph(triples: &[(&str, &str, &str)]) -> KnowledgeGraph {
        let t: Vec<_> = triples.iter().map(|(a, l, b)| Triple::new(*a, *l, *b)).collect();
        KnowledgeGraph::from_triples(&t).unwrap()
    }

    fn p(alpha: f64, avg: f64) -> CoarseningParams {
        CoarseningParams::new(alpha, avg).unwrap()
    }

    #[test]
    fn lone_edge_raw_is_ln2() {
        let g = graph(&[("a", "L", "b")]);
        let w = compute_fine_weights(&g);
        for &r in &w.raw {
            assert!((r - 2f64.ln()).abs() < 1e-12);
        }
        // both raw weights equal -> degenerate rescale
        assert_eq!(w.scaled, vec![0.0, 0.0]);
    }

    #[test]
    fn fan_out_counts_source_and_target() {
        // v has 3 same-label out-edges; each target has only that in-edge of the class.
        let g = graph(&[("v", "L", "x"), ("v", "L", "y"), ("v", "L", "z")]);
        let w = compute_fine_weights(&g);
        let v = g.node_id("v").unwrap();
        for e in g.out_edges(v) {
            assert!(!e.inverse);
            assert!((w.raw[e.id as usize] - 4f64.ln()).abs() < 1e-12);
        }
        // inverse edges x->v: 1 out of class (L,inv) at x + 3 in of class (L,inv) at v
        let x = g.node_id("x").unwrap();
        let inv = g.out_edges(x).next().unwrap();
        assert!(inv.inverse);
        assert!((w.raw[inv.id as usize] - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rescale_spans_unit_interval() {
        let g = graph(&[("v", "L", "x"), ("v", "L", "y"), ("v", "L", "z"), ("a", "M", "b")]);
        let w = compute_fine_weights(&g);
        let min = w.scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = w.scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(min, 0.0);
        assert_eq!(max, 1.0);
    }

    #[test]
    fn coarsen_examples() {
        let params = p(0.5, 4.0);
        assert_eq!(params.activation_level(0.5), 4);
        assert_eq!(params.activation_level(0.0), 0);
        assert_eq!(params.activation_level(1.0), 8);
        assert_eq!(params.activation_level(0.75), 6);
        assert_eq!(params.activation_level(0.25), 2);
    }

    #[test]
    fn bound_examples() {
        let params = p(0.5, 4.0);
        let b = bound_fine_weight(2, &params).unwrap();
        assert!((b.start - 0.1875).abs() < 1e-12 && (b.end - 0.3125).abs() < 1e-12);
        assert!(b.contains(&0.25));
        let b = bound_fine_weight(4, &params).unwrap();
        assert!((b.start - 0.4375).abs() < 1e-12 && (b.end - 0.5625).abs() < 1e-12);
        assert!(matches!(
            bound_fine_weight(9, &params),
            Err(RaksError::LevelOutOfRange { level: 9, max: 8 })
        ));
    }

    #[test]
    fn path_bound_examples() {
        let params = p(0.5, 4.0);
        assert_eq!(upper_bound_path_score(1, 0, &params).unwrap(), 0.0);
        let single = upper_bound_path_score(2, 5, &params).unwrap();
        assert_eq!(single, bound_fine_weight(4, &params).unwrap().end);
        let v = upper_bound_path_score(3, 4, &params).unwrap();
        assert!((v - 0.75).abs() < 1e-12);
        assert!(matches!(
            upper_bound_path_score(4, 2, &params),
            Err(RaksError::InfeasiblePath { .. })
        ));
    }

    #[test]
    fn params_validated() {
        assert!(CoarseningParams::new(0.0, 4.0).is_err());
        assert!(CoarseningParams::new(1.0, 4.0).is_err());
        assert!(CoarseningParams::new(0.5, 0.0).is_err());
    }

    #[test]
    fn complete_graph_hops() {
        let names = ["a", "b", "c", "d", "e"];
        let mut t = Vec::new();
        for i in 0..5 {
            for j in i + 1..5 {
                t.push((names[i], "L", names[j]));
            }
        }
        let g = graph(&t);
        let s = estimate_avg_hops(&g, HopSampling::Exhaustive).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.stddev, 0.0);
        let r = estimate_avg_hops(&g, HopSampling::Random { pairs: 200, seed: 3 }).unwrap();
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.pairs, 200);
    }

    #[test]
    fn path_graph_hops() {
        let g = graph(&[("a", "L", "b"), ("b", "L", "c")]);
        let s = estimate_avg_hops(&g, HopSampling::Exhaustive).unwrap();
        assert!((s.mean - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn isolated_pair_errors() {
        let g = graph(&[("a", "L", "a")]);
        assert!(matches!(
            estimate_avg_hops(&g, HopSampling::Random { pairs: 5, seed: 1 }),
            Err(RaksError::NoConnectedPair { .. })
        ));
    }

    #[test]
    fn sampling_is_seeded() {
        let g = graph(&[("a", "L", "b"), ("b", "L", "c"), ("c", "L", "d"), ("x", "L", "y")]);
        let a = estimate_avg_hops(&g, HopSampling::Random { pairs: 50, seed: 9 }).unwrap();
        let b = estimate_avg_hops(&g, HopSampling::Random { pairs: 50, seed: 9 }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn histogram_bins() {
        assert_eq!(histogram(&[0.0, 0.05, 0.5, 1.0], 10), vec![2, 0, 0, 0, 0, 1, 0, 0, 0, 1]);
    }
}
