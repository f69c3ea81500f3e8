//! Binary index file.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "RAKS" version:u8
//! header       nodes:u64 edges:u64 labels:u64 alpha:f64 avg_hops:f64 stddev:f64 pairs:u64
//! id map       nodes x (len:u32 utf8)
//! label table  labels x (len:u32 utf8)
//! csr offsets  (nodes + 1) x u64
//! csr entries  edges x (target:u32 label:u32 inverse:u8 triple:u32)
//! fine weights edges x (raw:f64 scaled:f64)
//! activations  edges x u32
//! text index   nodes x (len:u32 utf8)
//! ```
//!
//! The reverse adjacency, lookups and postings are rebuilt on load.

use std::fs::File;
use std::io::{BufWriter, Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::error::{RaksError, Result};
use crate::graph::{KnowledgeGraph, Triple};
use crate::search::Engine;
use crate::text::NodeTextIndex;
use crate::weighting::{
    coarsen, compute_fine_weights, estimate_avg_hops, ActivationLevels, CoarseningParams,
    FineWeights, HopSampling, HopStats,
};

pub const MAGIC: &[u8; 4] = b"RAKS";
pub const VERSION: u8 = 1;

/// Everything a query needs, as built from an edge list and node texts.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexBundle {
    pub graph: KnowledgeGraph,
    pub text: NodeTextIndex,
    pub weights: FineWeights,
    pub activations: ActivationLevels,
    pub coarsening: CoarseningParams,
    pub hops: HopStats,
}

impl IndexBundle {
    pub fn build(
        triples: &[Triple],
        node_texts: impl FnOnce(&KnowledgeGraph) -> Result<Vec<(u32, String)>>,
        alpha: f64,
        sampling: HopSampling,
    ) -> Result<Self> {
        let graph = KnowledgeGraph::from_triples(triples)?;
        let text = NodeTextIndex::build(graph.node_count(), &node_texts(&graph)?)?;
        let weights = compute_fine_weights(&graph);
        let hops = estimate_avg_hops(&graph, sampling)?;
        let coarsening = CoarseningParams::new(alpha, hops.mean)?;
        let activations = coarsen(&weights, &coarsening);
        Ok(Self { graph, text, weights, activations, coarsening, hops })
    }

    /// Recomputes activation levels for a different `alpha`.
    pub fn with_alpha(&self, alpha: f64) -> Result<ActivationLevels> {
        let params = CoarseningParams::new(alpha, self.coarsening.avg_hops())?;
        Ok(coarsen(&self.weights, &params))
    }

    pub fn engine(&self) -> Engine<'_> {
        Engine::new(&self.graph, &self.activations, &self.weights)
    }
}

fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    let len = u32::try_from(s.len()).map_err(|_| RaksError::InvalidParams("string too long".into()))?;
    w.write_u32::<LE>(len)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

pub fn write_index<W: Write>(w: &mut W, b: &IndexBundle) -> Result<()> {
    let g = &b.graph;
    w.write_all(MAGIC)?;
    w.write_u8(VERSION)?;
    w.write_u64::<LE>(g.node_count() as u64)?;
    w.write_u64::<LE>(g.edge_count() as u64)?;
    w.write_u64::<LE>(g.label_count() as u64)?;
    w.write_f64::<LE>(b.coarsening.alpha())?;
    w.write_f64::<LE>(b.coarsening.avg_hops())?;
    w.write_f64::<LE>(b.hops.stddev)?;
    w.write_u64::<LE>(b.hops.pairs as u64)?;
    for name in &g.node_names {
        write_str(w, name)?;
    }
    for label in &g.labels {
        write_str(w, label)?;
    }
    for &o in &g.out_offsets {
        w.write_u64::<LE>(o as u64)?;
    }
    for e in 0..g.edge_count() {
        w.write_u32::<LE>(g.out_targets[e])?;
        w.write_u32::<LE>(g.out_labels[e])?;
        w.write_u8(u8::from(g.out_inverse[e]))?;
        w.write_u32::<LE>(g.out_triple[e])?;
    }
    for (raw, scaled) in b.weights.raw.iter().zip(&b.weights.scaled) {
        w.write_f64::<LE>(*raw)?;
        w.write_f64::<LE>(*scaled)?;
    }
    for &a in b.activations.as_slice() {
        w.write_u32::<LE>(a)?;
    }
    for v in 0..g.node_count() {
        write_str(w, b.text.text(v as u32))?;
    }
    Ok(())
}

pub fn save_index(path: impl AsRef<Path>, bundle: &IndexBundle) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_index(&mut w, bundle)?;
    w.flush()?;
    Ok(())
}

struct Reader<'a> {
    cur: Cursor<&'a [u8]>,
}

fn truncated(section: &str) -> impl Fn(std::io::Error) -> RaksError + '_ {
    move |_| RaksError::Corrupt(format!("truncated in {section}"))
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.cur.get_ref().len() - self.cur.position() as usize
    }

    /// Rejects counts that could not fit in the rest of the file.
    fn count(&mut self, section: &str, min_bytes_each: usize) -> Result<usize> {
        let n = self.cur.read_u64::<LE>().map_err(truncated(section))?;
        let n = usize::try_from(n).map_err(|_| RaksError::Corrupt(format!("{section} count overflow")))?;
        if n.saturating_mul(min_bytes_each) > self.remaining() {
            return Err(RaksError::Corrupt(format!("truncated in {section}")));
        }
        Ok(n)
    }

    fn string(&mut self, section: &str) -> Result<String> {
        let len = self.cur.read_u32::<LE>().map_err(truncated(section))? as usize;
        if len > self.remaining() {
            return Err(RaksError::Corrupt(format!("truncated in {section}")));
        }
        let mut buf = vec![0; len];
        self.cur.read_exact(&mut buf).map_err(truncated(section))?;
        String::from_utf8(buf).map_err(|_| RaksError::Corrupt(format!("invalid utf-8 in {section}")))
    }
}

pub fn read_index(bytes: &[u8]) -> Result<IndexBundle> {
    if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
        return Err(RaksError::BadMagic);
    }
    let version = *bytes.get(4).ok_or_else(|| RaksError::Corrupt("truncated in header".into()))?;
    if version != VERSION {
        return Err(RaksError::UnsupportedVersion(version));
    }
    let mut r = Reader { cur: Cursor::new(bytes) };
    r.cur.set_position(5);

    let header = "header";
    let nodes = r.count(header, 8)?;
    let edges = r.count(header, 13)?;
    let labels = r.count(header, 4)?;
    let alpha = r.cur.read_f64::<LE>().map_err(truncated(header))?;
    let avg_hops = r.cur.read_f64::<LE>().map_err(truncated(header))?;
    let stddev = r.cur.read_f64::<LE>().map_err(truncated(header))?;
    let pairs = r.cur.read_u64::<LE>().map_err(truncated(header))? as usize;
    let coarsening =
        CoarseningParams::new(alpha, avg_hops).map_err(|e| RaksError::Corrupt(e.to_string()))?;

    let mut g = KnowledgeGraph {
        node_names: (0..nodes).map(|_| r.string("id map")).collect::<Result<_>>()?,
        labels: (0..labels).map(|_| r.string("label table")).collect::<Result<_>>()?,
        ..Default::default()
    };

    let mut offsets = Vec::with_capacity(nodes + 1);
    for _ in 0..=nodes {
        offsets.push(r.cur.read_u64::<LE>().map_err(truncated("csr offsets"))? as usize);
    }
    if offsets.first() != Some(&0)
        || offsets.last() != Some(&edges)
        || offsets.windows(2).any(|w| w[0] > w[1])
    {
        return Err(RaksError::Corrupt("csr offsets inconsistent".into()));
    }
    g.out_offsets = offsets;

    let section = "csr entries";
    g.out_targets.reserve(edges);
    for _ in 0..edges {
        let target = r.cur.read_u32::<LE>().map_err(truncated(section))?;
        let label = r.cur.read_u32::<LE>().map_err(truncated(section))?;
        let inverse = r.cur.read_u8().map_err(truncated(section))?;
        let triple = r.cur.read_u32::<LE>().map_err(truncated(section))?;
        if target as usize >= nodes || label as usize >= labels || inverse > 1 {
            return Err(RaksError::Corrupt("csr entry out of range".into()));
        }
        g.out_targets.push(target);
        g.out_labels.push(label);
        g.out_inverse.push(inverse == 1);
        g.out_triple.push(triple);
    }

    let mut raw = Vec::with_capacity(edges);
    let mut scaled = Vec::with_capacity(edges);
    for _ in 0..edges {
        raw.push(r.cur.read_f64::<LE>().map_err(truncated("fine weights"))?);
        scaled.push(r.cur.read_f64::<LE>().map_err(truncated("fine weights"))?);
    }
    let mut activations = Vec::with_capacity(edges);
    for _ in 0..edges {
        activations.push(r.cur.read_u32::<LE>().map_err(truncated("activations"))?);
    }
    let texts: Vec<(u32, String)> =
        (0..nodes).map(|v| Ok((v as u32, r.string("text index")?))).collect::<Result<_>>()?;
    if r.remaining() != 0 {
        return Err(RaksError::Corrupt(format!("{} trailing bytes", r.remaining())));
    }

    g.rebuild_reverse();
    g.rebuild_lookups();
    let text = NodeTextIndex::build(nodes, &texts)?;
    Ok(IndexBundle {
        graph: g,
        text,
        weights: FineWeights { raw, scaled },
        activations: ActivationLevels(activations),
        coarsening,
        hops: HopStats { mean: avg_hops, stddev, pairs },
    })
}

pub fn load_index(path: impl AsRef<Path>) -> Result<IndexBundle> {
    let bytes = std::fs::read(path)?;
    read_index(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_bundle() -> IndexBundle {
        let triples = [Triple::new("a", "L", "b"), Triple::new("b", "M", "c")];
        IndexBundle::build(
            &triples,
            |g| Ok(vec![(g.node_id("a").unwrap(), "Alpha node".into())]),
            0.5,
            HopSampling::Exhaustive,
        )
        .unwrap()
    }

    fn encode(b: &IndexBundle) -> Vec<u8> {
        let mut out = Vec::new();
        write_index(&mut out, b).unwrap();
        out
    }

    #[test]
    fn round_trip_chain() {
        let b = chain_bundle();
        let back = read_index(&encode(&b)).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.text.lookup("alpha").unwrap().nodes, vec![0]);
    }

    #[test]
    fn empty_file_is_bad_magic() {
        assert!(matches!(read_index(&[]), Err(RaksError::BadMagic)));
        assert!(matches!(read_index(b"NOPE\x01"), Err(RaksError::BadMagic)));
    }

    #[test]
    fn version_two_rejected() {
        let mut bytes = encode(&chain_bundle());
        bytes[4] = 2;
        assert!(matches!(read_index(&bytes), Err(RaksError::UnsupportedVersion(2))));
    }

    #[test]
    fn every_truncation_rejected() {
        let bytes = encode(&chain_bundle());
        for len in 5..bytes.len() {
            assert!(matches!(read_index(&bytes[..len]), Err(RaksError::Corrupt(_))), "len {len}");
        }
    }
}
