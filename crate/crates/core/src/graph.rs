//! Bidirected labeled knowledge graph in compressed sparse row form.
//!
//! Every ingested triple `(u, L, v)` yields two directed edges: the original
//! `u -> v` and an inverse `v -> u`, both carrying label `L` and distinguished
//! by the inverse flag. Forward adjacency lists out-edges per node; reverse
//! adjacency lists in-edges per node by referencing forward edge ids, so the
//! two views always describe the same edge multiset.

use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{RaksError, Result};

pub type NodeId = u32;
pub type EdgeId = u32;
pub type LabelId = u32;

/// One `src<TAB>label<TAB>dst` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub src: String,
    pub label: String,
    pub dst: String,
}

impl Triple {
    pub fn new(src: impl Into<String>, label: impl Into<String>, dst: impl Into<String>) -> Self {
        Self { src: src.into(), label: label.into(), dst: dst.into() }
    }
}

/// A directed edge as seen from its source node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeRef {
    pub id: EdgeId,
    pub src: NodeId,
    pub dst: NodeId,
    pub label: LabelId,
    pub inverse: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KnowledgeGraph {
    pub(crate) node_names: Vec<String>,
    pub(crate) node_lookup: HashMap<String, NodeId>,
    pub(crate) labels: Vec<String>,
    pub(crate) label_lookup: HashMap<String, LabelId>,

    pub(crate) out_offsets: Vec<usize>,
    pub(crate) out_targets: Vec<NodeId>,
    pub(crate) out_labels: Vec<LabelId>,
    pub(crate) out_inverse: Vec<bool>,
    /// Index of the ingested triple an edge came from; an edge and its
    /// inverse share it.
    pub(crate) out_triple: Vec<u32>,

    pub(crate) in_offsets: Vec<usize>,
    pub(crate) in_edges: Vec<EdgeId>,
    pub(crate) in_sources: Vec<NodeId>,
}

/// Reads tab-separated triples. Blank lines and lines starting with `#` are
/// skipped; line numbers in errors are 1-based.
pub fn parse_triples<R: BufRead>(reader: R) -> Result<Vec<Triple>> {
    let mut triples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(RaksError::Parse {
                line: idx + 1,
                message: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        if fields.iter().any(|f| f.is_empty()) {
            return Err(RaksError::Parse { line: idx + 1, message: "empty field".into() });
        }
        triples.push(Triple::new(fields[0], fields[1], fields[2]));
    }
    Ok(triples)
}

impl KnowledgeGraph {
    /// Builds the bidirected graph. String ids become dense node ids in
    /// first-seen order; duplicate triples are kept.
    pub fn from_triples(triples: &[Triple]) -> Result<Self> {
        let mut g = KnowledgeGraph::default();
        let mut raw: Vec<(NodeId, NodeId, LabelId, bool, u32)> = Vec::with_capacity(triples.len() * 2);
        for (t, triple) in triples.iter().enumerate() {
            if triple.src.is_empty() || triple.label.is_empty() || triple.dst.is_empty() {
                return Err(RaksError::Parse { line: t + 1, message: "empty field".into() });
            }
            let u = g.intern_node(&triple.src);
            let label = g.intern_label(&triple.label);
            let v = g.intern_node(&triple.dst);
            let t = u32::try_from(t).map_err(|_| RaksError::InvalidParams("too many triples".into()))?;
            raw.push((u, v, label, false, t));
            raw.push((v, u, label, true, t));
        }
        if raw.len() > u32::MAX as usize {
            return Err(RaksError::InvalidParams("too many edges".into()));
        }

        let n = g.node_names.len();
        let mut offsets = vec![0usize; n + 1];
        for &(src, ..) in &raw {
            offsets[src as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let m = raw.len();
        let mut cursor = offsets.clone();
        g.out_targets = vec![0; m];
        g.out_labels = vec![0; m];
        g.out_inverse = vec![false; m];
        g.out_triple = vec![0; m];
        for &(src, dst, label, inverse, t) in &raw {
            let slot = cursor[src as usize];
            cursor[src as usize] += 1;
            g.out_targets[slot] = dst;
            g.out_labels[slot] = label;
            g.out_inverse[slot] = inverse;
            g.out_triple[slot] = t;
        }
        g.out_offsets = offsets;
        g.rebuild_reverse();
        Ok(g)
    }

    fn intern_node(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.node_lookup.get(name) {
            return id;
        }
        let id = self.node_names.len() as NodeId;
        self.node_names.push(name.to_owned());
        self.node_lookup.insert(name.to_owned(), id);
        id
    }

    fn intern_label(&mut self, name: &str) -> LabelId {
        if let Some(&id) = self.label_lookup.get(name) {
            return id;
        }
        let id = self.labels.len() as LabelId;
        self.labels.push(name.to_owned());
        self.label_lookup.insert(name.to_owned(), id);
        id
    }

    /// Recomputes the reverse view from the forward arrays.
    pub(crate) fn rebuild_reverse(&mut self) {
        let n = self.node_count();
        let mut offsets = vec![0usize; n + 1];
        for &dst in &self.out_targets {
            offsets[dst as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut in_edges = vec![0 as EdgeId; self.out_targets.len()];
        let mut in_sources = vec![0 as NodeId; self.out_targets.len()];
        for src in 0..n {
            for e in self.out_offsets[src]..self.out_offsets[src + 1] {
                let dst = self.out_targets[e] as usize;
                in_edges[cursor[dst]] = e as EdgeId;
                in_sources[cursor[dst]] = src as NodeId;
                cursor[dst] += 1;
            }
        }
        self.in_offsets = offsets;
        self.in_edges = in_edges;
        self.in_sources = in_sources;
    }

    pub(crate) fn rebuild_lookups(&mut self) {
        self.node_lookup =
            self.node_names.iter().enumerate().map(|(i, s)| (s.clone(), i as NodeId)).collect();
        self.label_lookup =
            self.labels.iter().enumerate().map(|(i, s)| (s.clone(), i as LabelId)).collect();
    }

    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    /// Number of directed edges (twice the number of ingested triples).
    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn node_name(&self, v: NodeId) -> &str {
        &self.node_names[v as usize]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.node_lookup.get(name).copied()
    }

    pub fn label_name(&self, label: LabelId) -> &str {
        &self.labels[label as usize]
    }

    pub fn label_id(&self, name: &str) -> Option<LabelId> {
        self.label_lookup.get(name).copied()
    }

    pub fn edge(&self, e: EdgeId) -> EdgeRef {
        let i = e as usize;
        EdgeRef {
            id: e,
            src: self.edge_source(e),
            dst: self.out_targets[i],
            label: self.out_labels[i],
            inverse: self.out_inverse[i],
        }
    }

    #[inline]
    pub fn edge_target(&self, e: EdgeId) -> NodeId {
        self.out_targets[e as usize]
    }

    /// Source node of a forward edge, found by binary search over offsets.
    pub fn edge_source(&self, e: EdgeId) -> NodeId {
        let e = e as usize;
        // the last offset <= e whose successor is > e
        let idx = self.out_offsets.partition_point(|&off| off <= e);
        (idx - 1) as NodeId
    }

    /// Triple index shared by an edge and its inverse.
    pub fn edge_triple(&self, e: EdgeId) -> u32 {
        self.out_triple[e as usize]
    }

    /// Range of forward edge ids leaving `v`.
    #[inline]
    pub fn out_edge_ids(&self, v: NodeId) -> std::ops::Range<EdgeId> {
        let v = v as usize;
        self.out_offsets[v] as EdgeId..self.out_offsets[v + 1] as EdgeId
    }

    pub fn out_edges(&self, v: NodeId) -> impl Iterator<Item = EdgeRef> + '_ {
        self.out_edge_ids(v).map(move |e| EdgeRef {
            id: e,
            src: v,
            dst: self.out_targets[e as usize],
            label: self.out_labels[e as usize],
            inverse: self.out_inverse[e as usize],
        })
    }

    /// In-edges of `v`, as forward edge ids ending at `v`.
    #[inline]
    pub fn in_edge_ids(&self, v: NodeId) -> &[EdgeId] {
        let v = v as usize;
        &self.in_edges[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    /// Sources of the in-edges of `v`, aligned with [`Self::in_edge_ids`].
    #[inline]
    pub fn in_sources(&self, v: NodeId) -> &[NodeId] {
        let v = v as usize;
        &self.in_sources[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn in_edges(&self, v: NodeId) -> impl Iterator<Item = EdgeRef> + '_ {
        self.in_edge_ids(v).iter().map(move |&e| self.edge(e))
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.out_offsets[v + 1] - self.out_offsets[v]
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.in_offsets[v + 1] - self.in_offsets[v]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        0..self.node_count() as NodeId
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeRef> + '_ {
        self.nodes().flat_map(move |v| self.out_edges(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stream_gives_empty_graph() {
        let g = KnowledgeGraph::from_triples(&[]).unwrap();
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn single_triple_is_bidirected() {
        let g = KnowledgeGraph::from_triples(&[Triple::new("a", "L", "b")]).unwrap();
        assert_eq!(g.node_count(), 2);
        let a = g.node_id("a").unwrap();
        let b = g.node_id("b").unwrap();
        let l = g.label_id("L").unwrap();
        let fa: Vec<_> = g.out_edges(a).map(|e| (e.dst, e.label, e.inverse)).collect();
        let fb: Vec<_> = g.out_edges(b).map(|e| (e.dst, e.label, e.inverse)).collect();
        assert_eq!(fa, vec![(b, l, false)]);
        assert_eq!(fb, vec![(a, l, true)]);
    }

    #[test]
    fn chain_has_two_forward_entries_per_node() {
        let g = KnowledgeGraph::from_triples(&[
            Triple::new("a", "L", "b"),
            Triple::new("b", "L", "c"),
            Triple::new("c", "L", "a"),
        ])
        .unwrap();
        for v in g.nodes() {
            assert_eq!(g.out_degree(v), 2);
            let originals = g.out_edges(v).filter(|e| !e.inverse).count();
            assert_eq!(originals, 1);
        }
    }

    #[test]
    fn duplicates_are_kept() {
        let t = Triple::new("a", "L", "b");
        let g = KnowledgeGraph::from_triples(&[t.clone(), t]).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.out_degree(0), 2);
    }

    #[test]
    fn edge_source_matches_adjacency() {
        let g = KnowledgeGraph::from_triples(&[
            Triple::new("a", "L", "b"),
            Triple::new("c", "M", "b"),
            Triple::new("b", "L", "d"),
        ])
        .unwrap();
        for v in g.nodes() {
            for e in g.out_edges(v) {
                assert_eq!(g.edge_source(e.id), v);
            }
        }
    }

    #[test]
    fn parse_skips_comments_and_reports_line() {
        let text = "# header\na\tL\tb\n\nb\tL\n";
        let err = parse_triples(text.as_bytes()).unwrap_err();
        match err {
            RaksError::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let ok = parse_triples("# c\na\tL\tb\n".as_bytes()).unwrap();
        assert_eq!(ok, vec![Triple::new("a", "L", "b")]);
    }
}
