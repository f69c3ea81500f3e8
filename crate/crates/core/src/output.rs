//! Rendering search outcomes as JSON documents, DOT digraphs or plain text.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::{KnowledgeGraph, NodeId};
use crate::ranking::Combination;
use crate::search::{QueryResult, SearchOutcome, SearchParams, Termination};
use crate::text::NodeTextIndex;
use crate::weighting::{ActivationLevels, FineWeights};

/// Read-only data needed to describe results.
#[derive(Clone, Copy)]
pub struct RenderContext<'a> {
    pub graph: &'a KnowledgeGraph,
    pub text: &'a NodeTextIndex,
    pub weights: &'a FineWeights,
    pub activations: &'a ActivationLevels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryEcho {
    pub central: Vec<String>,
    pub marginal: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub topk: usize,
    pub beam: usize,
    pub gamma: f64,
    pub alpha: Option<f64>,
    pub max_level: u32,
    pub threads: usize,
    pub time_limit_s: Option<f64>,
    pub combination: String,
    pub termination: String,
}

impl ParamsEcho {
    pub fn new(params: &SearchParams, alpha: Option<f64>) -> Self {
        Self {
            topk: params.topk,
            beam: params.beam,
            gamma: params.score.gamma(),
            alpha,
            max_level: params.max_level,
            threads: params.threads,
            time_limit_s: params.time_limit.map(|d| d.as_secs_f64()),
            combination: match params.score.combination {
                Combination::Additive => "additive",
                Combination::Multiplicative => "multiplicative",
            }
            .into(),
            termination: match params.termination {
                Termination::Conservative => "conservative",
                Termination::Inequality => "inequality",
            }
            .into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub id: String,
    pub index: NodeId,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub src: String,
    pub dst: String,
    pub label: String,
    pub inverse: bool,
    pub fine_weight: f64,
    pub activation: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEntry {
    pub rank: usize,
    /// Combined score for radial results, central score otherwise.
    pub combined_score: f64,
    pub central_score: u32,
    pub marginal_score: Option<u32>,
    pub tie_break: f64,
    pub central_node: NodeEntry,
    pub keyword_distances: Vec<u32>,
    pub marginal_distances: Option<Vec<u32>>,
    pub nodes: Vec<NodeEntry>,
    /// Ascending edge id order.
    pub edges: Vec<EdgeEntry>,
    /// Absent for central-only queries.
    pub ptc: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub query: QueryEcho,
    pub params: ParamsEcho,
    pub results: Vec<ResultEntry>,
    pub diagnostics: Vec<String>,
    pub ptc_rejections: usize,
    pub errors: Vec<String>,
}

impl ResultDocument {
    pub fn from_outcome(
        ctx: &RenderContext<'_>,
        query: QueryEcho,
        params: ParamsEcho,
        outcome: &SearchOutcome,
    ) -> Self {
        let results =
            outcome.results.iter().enumerate().map(|(i, r)| result_entry(ctx, i + 1, r)).collect();
        Self {
            query,
            params,
            results,
            diagnostics: outcome.diagnostics.clone(),
            ptc_rejections: outcome.ptc_rejections,
            errors: Vec::new(),
        }
    }

    pub fn from_errors(query: QueryEcho, params: ParamsEcho, errors: Vec<String>) -> Self {
        Self { query, params, results: Vec::new(), diagnostics: Vec::new(), ptc_rejections: 0, errors }
    }
}

fn node_entry(ctx: &RenderContext<'_>, v: NodeId) -> NodeEntry {
    NodeEntry { id: ctx.graph.node_name(v).to_owned(), index: v, text: ctx.text.text(v).to_owned() }
}

pub fn result_entry(ctx: &RenderContext<'_>, rank: usize, r: &QueryResult) -> ResultEntry {
    let cg = r.central();
    let edges = r
        .edges()
        .into_iter()
        .map(|e| {
            let er = ctx.graph.edge(e);
            EdgeEntry {
                src: ctx.graph.node_name(er.src).to_owned(),
                dst: ctx.graph.node_name(er.dst).to_owned(),
                label: ctx.graph.label_name(er.label).to_owned(),
                inverse: er.inverse,
                fine_weight: ctx.weights.get(e),
                activation: ctx.activations.get(e),
            }
        })
        .collect();
    ResultEntry {
        rank,
        combined_score: r.primary_score(),
        central_score: r.central_score(),
        marginal_score: r.marginal_score(),
        tie_break: r.tie_break(),
        central_node: node_entry(ctx, cg.central_node),
        keyword_distances: cg.keyword_distances.clone(),
        marginal_distances: match r {
            QueryResult::Central(_) => None,
            QueryResult::Radial(rpg) => Some(rpg.marginal_distances.clone()),
        },
        nodes: r.nodes().into_iter().map(|v| node_entry(ctx, v)).collect(),
        edges,
        ptc: r.ptc(),
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

/// One digraph per result. The central node is double-circled and central
/// keyword nodes are filled.
pub fn render_dot(ctx: &RenderContext<'_>, results: &[QueryResult]) -> String {
    let mut out = String::new();
    for (i, r) in results.iter().enumerate() {
        let cg = r.central();
        let _ = writeln!(out, "digraph result_{} {{", i + 1);
        let _ = writeln!(out, "  label=\"rank {} score {}\";", i + 1, r.primary_score());
        for v in r.nodes() {
            let name = ctx.graph.node_name(v);
            let text = ctx.text.text(v);
            let label = if text.is_empty() { name.to_owned() } else { format!("{name}\n{text}") };
            let mut attrs = vec![format!("label=\"{}\"", dot_escape(&label))];
            if v == cg.central_node {
                attrs.push("shape=doublecircle".into());
            }
            if cg.central_keyword_nodes.contains(&v) {
                attrs.push("style=filled".into());
            }
            let _ = writeln!(out, "  n{v} [{}];", attrs.join(", "));
        }
        for e in r.edges() {
            let er = ctx.graph.edge(e);
            let mut label = ctx.graph.label_name(er.label).to_owned();
            if er.inverse {
                label.push_str(" (inv)");
            }
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", er.src, er.dst, dot_escape(&label));
        }
        out.push_str("}\n");
    }
    out
}

pub fn render_text(doc: &ResultDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "query central={:?} marginal={:?}: {} result(s)",
        doc.query.central,
        doc.query.marginal,
        doc.results.len()
    );
    for r in &doc.results {
        let _ = write!(out, "#{} score {} (central {}", r.rank, r.combined_score, r.central_score);
        if let Some(sm) = r.marginal_score {
            let _ = write!(out, ", marginal {sm}");
        }
        let _ = writeln!(out, ", tie-break {:.4})", r.tie_break);
        let _ = writeln!(out, "  central node {} {:?}", r.central_node.id, r.central_node.text);
        for e in &r.edges {
            let inv = if e.inverse { " (inv)" } else { "" };
            let _ = writeln!(out, "    {} -[{}{}]-> {}  a={}", e.src, e.label, inv, e.dst, e.activation);
        }
    }
    for d in &doc.diagnostics {
        let _ = writeln!(out, "note: {d}");
    }
    out
}
