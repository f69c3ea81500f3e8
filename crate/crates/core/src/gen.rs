//! Seeded synthetic knowledge graphs with power-law label frequencies.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{RaksError, Result};
use crate::graph::Triple;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub nodes: usize,
    pub edges: usize,
    pub labels: usize,
    /// Exponent of the label distribution, `P(label i) ~ 1 / (i + 1)^skew`.
    pub skew: f64,
    pub seed: u64,
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(RaksError::InvalidParams("need at least 2 nodes".into()));
        }
        if self.labels == 0 {
            return Err(RaksError::InvalidParams("need at least 1 label".into()));
        }
        if !(self.skew >= 0.0 && self.skew.is_finite()) {
            return Err(RaksError::InvalidParams(format!("skew must be >= 0, got {}", self.skew)));
        }
        Ok(())
    }

    /// Number of distinct text tokens shared between nodes.
    pub fn vocabulary(&self) -> usize {
        (self.nodes / 10).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticGraph {
    pub triples: Vec<Triple>,
    /// `(node id, text)` for every node.
    pub texts: Vec<(String, String)>,
}

pub fn node_name(v: usize) -> String {
    format!("v{v}")
}

pub fn label_name(i: usize) -> String {
    format!("r{i}")
}

/// Shared vocabulary token `j`.
pub fn word(j: usize) -> String {
    format!("w{j}")
}

/// Uniform random endpoints without self-loops; each node's text is its own
/// name plus two vocabulary words.
pub fn generate(params: &GenParams) -> Result<SyntheticGraph> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let label_dist = WeightedIndex::new((0..params.labels).map(|i| 1.0 / ((i + 1) as f64).powf(params.skew)))
        .map_err(|e| RaksError::InvalidParams(e.to_string()))?;
    let labels: Vec<String> = (0..params.labels).map(label_name).collect();
    let names: Vec<String> = (0..params.nodes).map(node_name).collect();
    let mut triples = Vec::with_capacity(params.edges);
    for _ in 0..params.edges {
        let u = rng.random_range(0..params.nodes);
        let mut v = rng.random_range(0..params.nodes - 1);
        if v >= u {
            v += 1;
        }
        let label = &labels[label_dist.sample(&mut rng)];
        triples.push(Triple::new(names[u].clone(), label.clone(), names[v].clone()));
    }
    let vocab = params.vocabulary();
    let texts = names
        .iter()
        .map(|name| {
            let a = rng.random_range(0..vocab);
            let b = rng.random_range(0..vocab);
            (name.clone(), format!("{name} {} {}", word(a), word(b)))
        })
        .collect();
    Ok(SyntheticGraph { triples, texts })
}

/// Edge counts per label id, in label order.
pub fn label_histogram(triples: &[Triple], labels: usize) -> Vec<usize> {
    let mut counts = vec![0; labels];
    for t in triples {
        if let Some(i) = t.label.strip_prefix('r').and_then(|s| s.parse::<usize>().ok()) {
            if i < labels {
                counts[i] += 1;
            }
        }
    }
    counts
}

/// Writes `<prefix>.edges.tsv` and `<prefix>.texts.tsv`.
pub fn write_files(graph: &SyntheticGraph, prefix: &Path) -> Result<(PathBuf, PathBuf)> {
    let with_suffix = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    let edges_path = with_suffix(".edges.tsv");
    let texts_path = with_suffix(".texts.tsv");
    let mut w = BufWriter::new(File::create(&edges_path)?);
    for t in &graph.triples {
        writeln!(w, "{}\t{}\t{}", t.src, t.label, t.dst)?;
    }
    w.flush()?;
    let mut w = BufWriter::new(File::create(&texts_path)?);
    for (id, text) in &graph.texts {
        writeln!(w, "{id}\t{text}")?;
    }
    w.flush()?;
    Ok((edges_path, texts_path))
}
