//! Shared exploration state: the node-keyword distance matrix, the frontier
//! flags shared by every keyword's BFS instance, and the joining flags.
//!
//! Within one level every write to the matrix stores `level + 1` and every
//! write to a frontier flag stores `true`, so concurrent writers never
//! disagree. Cells are single-word atomics accessed with relaxed ordering;
//! the join at the end of each parallel level orders them before the next
//! read phase.

use std::sync::atomic::{AtomicBool, AtomicU32, Ordering};

use rayon::prelude::*;

use crate::error::{RaksError, Result};
use crate::graph::{KnowledgeGraph, NodeId};
use crate::text::KeywordMatch;
use crate::weighting::ActivationLevels;

/// Distance of an unreached cell.
pub const INF: u32 = u32::MAX;

/// `|V| x |T|` table of keyword-to-node distances, row-major.
pub struct NodeKeywordMatrix {
    cells: Vec<AtomicU32>,
    columns: usize,
}

impl NodeKeywordMatrix {
    pub fn new(nodes: usize, columns: usize) -> Self {
        Self { cells: (0..nodes * columns).map(|_| AtomicU32::new(INF)).collect(), columns }
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn rows(&self) -> usize {
        self.cells.len().checked_div(self.columns).unwrap_or(0)
    }

    #[inline]
    pub fn get(&self, v: NodeId, column: usize) -> u32 {
        self.cells[v as usize * self.columns + column].load(Ordering::Relaxed)
    }

    #[inline]
    pub(crate) fn set(&self, v: NodeId, column: usize, value: u32) {
        self.cells[v as usize * self.columns + column].store(value, Ordering::Relaxed);
    }

    pub fn row(&self, v: NodeId) -> Vec<u32> {
        (0..self.columns).map(|j| self.get(v, j)).collect()
    }

    /// Plain copy of every cell, row-major.
    pub fn snapshot(&self) -> Vec<u32> {
        self.cells.iter().map(|c| c.load(Ordering::Relaxed)).collect()
    }
}

/// Frontier Flag Array.
pub struct FrontierFlags(Vec<AtomicBool>);

impl FrontierFlags {
    pub fn new(nodes: usize) -> Self {
        Self((0..nodes).map(|_| AtomicBool::new(false)).collect())
    }

    #[inline]
    pub(crate) fn set(&self, v: NodeId) {
        self.0[v as usize].store(true, Ordering::Relaxed);
    }

    pub fn is_set(&self, v: NodeId) -> bool {
        self.0[v as usize].load(Ordering::Relaxed)
    }

    /// Sequential scan returning flagged ids in ascending order, clearing
    /// every flag.
    pub(crate) fn drain(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        for (v, flag) in self.0.iter().enumerate() {
            if flag.swap(false, Ordering::Relaxed) {
                out.push(v as NodeId);
            }
        }
        out
    }
}

/// Joining Flag Array. Stores the level at which a node was joined so the
/// recovery step can tell whether the node was still expanding at a given
/// level.
pub struct JoiningFlags(Vec<AtomicU32>);

impl JoiningFlags {
    pub fn new(nodes: usize) -> Self {
        Self((0..nodes).map(|_| AtomicU32::new(INF)).collect())
    }

    #[inline]
    pub fn is_joined(&self, v: NodeId) -> bool {
        self.joined_at(v).is_some()
    }

    #[inline]
    pub fn joined_at(&self, v: NodeId) -> Option<u32> {
        let l = self.0[v as usize].load(Ordering::Relaxed);
        (l != INF).then_some(l)
    }

    /// Whether `v` was skipped as a frontier at expansion level `level`.
    #[inline]
    pub fn blocked_at(&self, v: NodeId, level: u32) -> bool {
        self.0[v as usize].load(Ordering::Relaxed) <= level
    }

    fn join(&self, v: NodeId, level: u32) {
        self.0[v as usize].store(level, Ordering::Relaxed);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Central,
    Marginal,
}

/// A node reached by every keyword of the phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Joined {
    pub node: NodeId,
    /// Largest keyword distance in the node's row.
    pub score: u32,
    /// Global level at which it was identified.
    pub level: u32,
}

pub struct SearchState {
    pub phase: Phase,
    pub matrix: NodeKeywordMatrix,
    pub frontier: FrontierFlags,
    pub joining: JoiningFlags,
    /// Current global level.
    pub level: u32,
    join_enabled: bool,
}

impl SearchState {
    /// Zeroes each keyword's own nodes and marks them as frontiers. Joining
    /// is enabled for the central phase always and for the marginal phase only
    /// when there are at least two marginal keywords.
    pub fn init(graph: &KnowledgeGraph, keywords: &[KeywordMatch], phase: Phase) -> Result<Self> {
        if let Some(empty) = keywords.iter().find(|k| k.nodes.is_empty()) {
            return Err(RaksError::KeywordUnresolved(empty.keyword.clone()));
        }
        let n = graph.node_count();
        let state = Self {
            phase,
            matrix: NodeKeywordMatrix::new(n, keywords.len()),
            frontier: FrontierFlags::new(n),
            joining: JoiningFlags::new(n),
            level: 0,
            join_enabled: match phase {
                Phase::Central => true,
                Phase::Marginal => keywords.len() >= 2,
            },
        };
        for (j, kw) in keywords.iter().enumerate() {
            for &v in &kw.nodes {
                if v as usize >= n {
                    return Err(RaksError::UnknownNode(v.to_string()));
                }
                state.matrix.set(v, j, 0);
                state.frontier.set(v);
            }
        }
        Ok(state)
    }

    pub fn join_enabled(&self) -> bool {
        self.join_enabled
    }

    pub fn keyword_count(&self) -> usize {
        self.matrix.columns()
    }

    /// Extracts the frontiers for the current level and clears the flags.
    pub fn enqueue_frontiers(&self) -> Vec<NodeId> {
        self.frontier.drain()
    }

    /// Joins every candidate that is not yet joined and whose row is fully
    /// reached. Candidates are the frontiers just enqueued, which are the only
    /// nodes whose rows changed during the previous level.
    pub fn identify(&self, candidates: &[NodeId]) -> Vec<Joined> {
        if !self.join_enabled || self.keyword_count() == 0 {
            return Vec::new();
        }
        let check = |&v: &NodeId| -> Option<Joined> {
            if self.joining.is_joined(v) {
                return None;
            }
            let mut score = 0;
            for j in 0..self.keyword_count() {
                let h = self.matrix.get(v, j);
                if h == INF {
                    return None;
                }
                score = score.max(h);
            }
            Some(Joined { node: v, score, level: self.level })
        };
        let found: Vec<Joined> = if rayon::current_num_threads() > 1 {
            candidates.par_iter().filter_map(check).collect()
        } else {
            candidates.iter().filter_map(check).collect()
        };
        for j in &found {
            self.joining.join(j.node, self.level);
        }
        found
    }

    /// One level of expansion over `frontiers`.
    pub fn expand_level(
        &self,
        graph: &KnowledgeGraph,
        activations: &ActivationLevels,
        frontiers: &[NodeId],
    ) {
        let level = self.level;
        if rayon::current_num_threads() > 1 {
            frontiers
                .par_iter()
                .with_min_len(64)
                .for_each(|&f| self.expand_frontier(graph, activations, f, level));
        } else {
            for &f in frontiers {
                self.expand_frontier(graph, activations, f, level);
            }
        }
    }

    #[inline]
    fn expand_frontier(
        &self,
        graph: &KnowledgeGraph,
        activations: &ActivationLevels,
        f: NodeId,
        level: u32,
    ) {
        if self.joining.is_joined(f) {
            return;
        }
        let edges = graph.out_edge_ids(f);
        for i in 0..self.keyword_count() {
            if self.matrix.get(f, i) > level {
                continue;
            }
            for e in edges.clone() {
                if activations.get(e) > level {
                    self.frontier.set(f);
                    continue;
                }
                let n = graph.edge_target(e);
                if self.matrix.get(n, i) != INF {
                    continue;
                }
                self.matrix.set(n, i, level + 1);
                self.frontier.set(n);
            }
        }
    }
}
