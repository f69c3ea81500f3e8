//! Two-phase radial pattern search.
//!
//! The central phase explores from every central keyword level by level,
//! identifies central nodes as soon as all central keywords reach them, and
//! recovers their central graphs. Once at least `beam` distinct central graphs
//! are known at a level boundary it stops, keeping the best `beam`. The
//! marginal phase then explores from the marginal keywords with a fresh
//! matrix and turns each central graph into a radial pattern graph once every
//! marginal keyword reaches its central keyword nodes.

pub mod ptc;
pub mod recover;
pub mod result;
pub mod state;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{RaksError, Result};
use crate::graph::KnowledgeGraph;
use crate::ranking::{rank_results, rpg_score, ScoreParams};
use crate::text::{KeywordMatch, NodeTextIndex};
use crate::weighting::{ActivationLevels, FineWeights};

pub use ptc::check_ptc;
pub use recover::{marginal_distances, recover_cg, recover_rpg};
pub use result::{CentralGraph, QueryResult, RadialPatternGraph, StructureKey};
pub use state::{Joined, NodeKeywordMatrix, Phase, SearchState, INF};

/// When the marginal phase may stop before exhausting its frontiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Termination {
    /// Stop once the k-th result scores strictly below the best score any
    /// unresolved central graph could still reach, using `level + 1` as the
    /// lower bound on its missing marginal distances.
    #[default]
    Conservative,
    /// Stop once `S(kth) <= gamma * min S^c(unfinished) + (1 - gamma) * S^m(kth)`.
    Inequality,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    pub topk: usize,
    /// Number of central graphs carried into the marginal phase.
    pub beam: usize,
    pub score: ScoreParams,
    pub max_level: u32,
    pub threads: usize,
    pub time_limit: Option<Duration>,
    pub termination: Termination,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            topk: 20,
            beam: 20,
            score: ScoreParams::default(),
            max_level: 20,
            threads: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            time_limit: Some(Duration::from_secs(500)),
            termination: Termination::Conservative,
        }
    }
}

impl SearchParams {
    /// Sets `topk` and the beam width together.
    pub fn with_topk(mut self, k: usize) -> Self {
        self.topk = k;
        self.beam = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.topk == 0 {
            return Err(RaksError::InvalidParams("topk must be at least 1".into()));
        }
        if self.beam < self.topk {
            return Err(RaksError::InvalidParams(format!(
                "beam width {} is smaller than topk {}",
                self.beam, self.topk
            )));
        }
        if self.max_level == 0 {
            return Err(RaksError::InvalidParams("max_level must be at least 1".into()));
        }
        if self.threads == 0 {
            return Err(RaksError::InvalidParams("threads must be at least 1".into()));
        }
        Ok(())
    }
}

/// Central and marginal keyword strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub central: Vec<String>,
    pub marginal: Vec<String>,
}

impl Query {
    pub fn new(central: Vec<String>, marginal: Vec<String>) -> Result<Self> {
        if central.is_empty() {
            return Err(RaksError::InvalidQuery("at least one central keyword is required".into()));
        }
        Ok(Self { central, marginal })
    }

    /// Looks up every keyword; all unresolved keywords are reported together.
    pub fn resolve(&self, index: &NodeTextIndex) -> Result<ResolvedQuery> {
        let mut unresolved = Vec::new();
        let mut lookup = |kws: &[String]| -> Result<Vec<KeywordMatch>> {
            let mut out = Vec::new();
            for kw in kws {
                match index.lookup(kw) {
                    Ok(m) => out.push(m),
                    Err(RaksError::KeywordUnresolved(k)) | Err(RaksError::InvalidKeyword(k)) => {
                        unresolved.push(k)
                    }
                    Err(e) => return Err(e),
                }
            }
            Ok(out)
        };
        let central = lookup(&self.central)?;
        let marginal = lookup(&self.marginal)?;
        if !unresolved.is_empty() {
            return Err(RaksError::Unresolved(unresolved));
        }
        Ok(ResolvedQuery { central, marginal })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedQuery {
    pub central: Vec<KeywordMatch>,
    pub marginal: Vec<KeywordMatch>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseEnd {
    /// Enough results were collected.
    Satisfied,
    /// No frontier was left.
    Exhausted,
    MaxLevel,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    /// Global level when the phase stopped.
    pub levels: u32,
    pub end: PhaseEnd,
    pub elapsed: Duration,
}

pub struct CentralPhase {
    pub state: SearchState,
    /// Every identified central node, in identification order.
    pub stubs: Vec<Joined>,
    /// Best `beam` distinct central graphs in rank order.
    pub graphs: Vec<CentralGraph>,
    pub report: PhaseReport,
}

pub struct MarginalPhase {
    pub state: SearchState,
    /// Best `topk` distinct radial pattern graphs in rank order.
    pub results: Vec<RadialPatternGraph>,
    /// Radial pattern graphs discarded for failing PTC.
    pub ptc_rejections: usize,
    pub report: PhaseReport,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub results: Vec<QueryResult>,
    pub central: PhaseReport,
    pub marginal: Option<PhaseReport>,
    pub ptc_rejections: usize,
    pub diagnostics: Vec<String>,
}

/// Keeps the first of every group of structurally identical results.
pub fn distinct_results<T>(ranked: Vec<T>, key: impl Fn(&T) -> StructureKey) -> Vec<T> {
    let mut seen = HashSet::new();
    ranked.into_iter().filter(|r| seen.insert(key(r))).collect()
}

fn cg_key(graph: &KnowledgeGraph, cg: &CentralGraph) -> StructureKey {
    StructureKey::new(graph, cg.nodes.iter().copied(), cg.edges.iter().copied())
}

fn rpg_key(graph: &KnowledgeGraph, rpg: &RadialPatternGraph) -> StructureKey {
    StructureKey::new(graph, rpg.nodes(), rpg.edges())
}

fn maybe_par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    if rayon::current_num_threads() > 1 {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

/// Read-only view of a built index that queries run against.
#[derive(Clone, Copy)]
pub struct Engine<'a> {
    pub graph: &'a KnowledgeGraph,
    pub activations: &'a ActivationLevels,
    pub weights: &'a FineWeights,
}

impl<'a> Engine<'a> {
    pub fn new(
        graph: &'a KnowledgeGraph,
        activations: &'a ActivationLevels,
        weights: &'a FineWeights,
    ) -> Self {
        Self { graph, activations, weights }
    }

    /// Level-synchronous loop: enqueue, identify, let `on_level` inspect the
    /// finished level, then expand. `on_level` returning `true` stops the run.
    fn explore(
        &self,
        state: &mut SearchState,
        max_level: u32,
        deadline: Option<Instant>,
        mut on_level: impl FnMut(&SearchState, Vec<Joined>) -> Result<bool>,
    ) -> Result<PhaseEnd> {
        loop {
            let frontiers = state.enqueue_frontiers();
            let joined = state.identify(&frontiers);
            if on_level(state, joined)? {
                return Ok(PhaseEnd::Satisfied);
            }
            if frontiers.is_empty() {
                return Ok(PhaseEnd::Exhausted);
            }
            if state.level >= max_level {
                return Ok(PhaseEnd::MaxLevel);
            }
            if deadline.is_some_and(|d| Instant::now() >= d) {
                return Ok(PhaseEnd::TimeLimit);
            }
            state.expand_level(self.graph, self.activations, &frontiers);
            state.level += 1;
        }
    }

    /// Explores until no frontier is left or `max_level` is reached, returning
    /// the final state and every identified node.
    pub fn explore_all(
        &self,
        keywords: &[KeywordMatch],
        phase: Phase,
        max_level: u32,
    ) -> Result<(SearchState, Vec<Joined>)> {
        let mut state = SearchState::init(self.graph, keywords, phase)?;
        let mut joined = Vec::new();
        self.explore(&mut state, max_level, None, |_, j| {
            joined.extend(j);
            Ok(false)
        })?;
        Ok((state, joined))
    }

    /// Runs the central phase on the current rayon pool.
    pub fn central_phase(
        &self,
        central: &[KeywordMatch],
        params: &SearchParams,
        deadline: Option<Instant>,
    ) -> Result<CentralPhase> {
        let started = Instant::now();
        let mut state = SearchState::init(self.graph, central, Phase::Central)?;
        let mut stubs = Vec::new();
        let mut graphs = Vec::new();
        let mut keys = HashSet::new();
        let end = self.explore(&mut state, params.max_level, deadline, |st, joined| {
            let recovered = maybe_par_map(&joined, |&stub| {
                recover_cg(self.graph, self.activations, self.weights, st, central, stub)
            });
            for cg in recovered {
                let cg = cg?;
                keys.insert(cg_key(self.graph, &cg));
                graphs.push(cg);
            }
            stubs.extend(joined);
            Ok(keys.len() >= params.beam)
        })?;
        let mut graphs = distinct_results(rank_results(graphs), |cg| cg_key(self.graph, cg));
        graphs.truncate(params.beam);
        let report = PhaseReport { levels: state.level, end, elapsed: started.elapsed() };
        Ok(CentralPhase { state, stubs, graphs, report })
    }

    /// Runs the marginal phase for the given central graphs on the current
    /// rayon pool.
    pub fn marginal_phase(
        &self,
        cgs: &[CentralGraph],
        marginal: &[KeywordMatch],
        params: &SearchParams,
        deadline: Option<Instant>,
    ) -> Result<MarginalPhase> {
        let started = Instant::now();
        let mut state = SearchState::init(self.graph, marginal, Phase::Marginal)?;
        let mut open = vec![true; cgs.len()];
        let mut rejected: Vec<usize> = Vec::new();
        let mut found: Vec<RadialPatternGraph> = Vec::new();
        let k = params.topk;
        let end = self.explore(&mut state, params.max_level, deadline, |st, _| {
            let ready: Vec<usize> = (0..cgs.len())
                .filter(|&i| open[i] && marginal_distances(st, &cgs[i]).is_some())
                .collect();
            let rpgs = maybe_par_map(&ready, |&i| {
                recover_rpg(self.graph, self.activations, self.weights, st, &cgs[i], &params.score)
                    .map(|mut rpg| {
                        rpg.ptc = check_ptc(&rpg, self.graph, marginal);
                        rpg
                    })
            });
            for (&i, rpg) in ready.iter().zip(rpgs) {
                let rpg = rpg?;
                open[i] = false;
                if rpg.ptc {
                    found.push(rpg);
                } else {
                    rejected.push(i);
                }
            }
            if !open.iter().any(|&o| o) {
                return Ok(true);
            }
            let ranked = distinct_results(rank_results(found.clone()), |r| {
                rpg_key(self.graph, r)
            });
            let Some(kth) = ranked.get(k - 1) else {
                return Ok(false);
            };
            let unfinished = (0..cgs.len()).filter(|&i| open[i]);
            Ok(match params.termination {
                Termination::Conservative => {
                    let next = f64::from(st.level + 1);
                    let bound = unfinished
                        .map(|i| rpg_score(f64::from(cgs[i].score), next, &params.score))
                        .fold(f64::INFINITY, f64::min);
                    kth.combined_score < bound
                }
                Termination::Inequality => {
                    let min_sc = unfinished
                        .chain(rejected.iter().copied())
                        .map(|i| cgs[i].score)
                        .min();
                    match min_sc {
                        None => true,
                        Some(sc) => {
                            kth.combined_score
                                <= rpg_score(f64::from(sc), f64::from(kth.marginal_score), &params.score)
                        }
                    }
                }
            })
        })?;
        let mut results =
            distinct_results(rank_results(found), |r| rpg_key(self.graph, r));
        results.truncate(k);
        let report = PhaseReport { levels: state.level, end, elapsed: started.elapsed() };
        Ok(MarginalPhase { state, results, ptc_rejections: rejected.len(), report })
    }

    /// Answers a resolved query with the top-k results in rank order.
    pub fn search(&self, query: &ResolvedQuery, params: &SearchParams) -> Result<SearchOutcome> {
        params.validate()?;
        if query.central.is_empty() {
            return Err(RaksError::InvalidQuery("at least one central keyword is required".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(params.threads)
            .build()
            .map_err(|e| RaksError::InvalidParams(format!("thread pool: {e}")))?;
        pool.install(|| self.search_in_pool(query, params))
    }

    fn search_in_pool(&self, query: &ResolvedQuery, params: &SearchParams) -> Result<SearchOutcome> {
        let deadline = params.time_limit.map(|t| Instant::now() + t);
        let mut diagnostics = Vec::new();
        let central = self.central_phase(&query.central, params, deadline)?;
        if central.graphs.is_empty() {
            diagnostics.push(format!(
                "no central connection found within level {}",
                central.report.levels
            ));
        }
        if central.report.end == PhaseEnd::TimeLimit {
            diagnostics.push("time limit reached during central phase; results are partial".into());
        }
        if query.marginal.is_empty() {
            let results = central
                .graphs
                .into_iter()
                .take(params.topk)
                .map(QueryResult::Central)
                .collect();
            return Ok(SearchOutcome {
                results,
                central: central.report,
                marginal: None,
                ptc_rejections: 0,
                diagnostics,
            });
        }
        if central.graphs.is_empty() {
            return Ok(SearchOutcome {
                results: Vec::new(),
                central: central.report,
                marginal: None,
                ptc_rejections: 0,
                diagnostics,
            });
        }
        let marginal = self.marginal_phase(&central.graphs, &query.marginal, params, deadline)?;
        if marginal.results.is_empty() {
            diagnostics.push(format!(
                "no radial pattern graph found within level {}",
                marginal.report.levels
            ));
        }
        if marginal.report.end == PhaseEnd::TimeLimit {
            diagnostics.push("time limit reached during marginal phase; results are partial".into());
        }
        Ok(SearchOutcome {
            results: marginal.results.into_iter().map(QueryResult::Radial).collect(),
            central: central.report,
            marginal: Some(marginal.report),
            ptc_rejections: marginal.ptc_rejections,
            diagnostics,
        })
    }
}
