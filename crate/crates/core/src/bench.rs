//! Repeated timing of queries across thread counts.

use std::io::BufRead;
use std::time::Duration;

use crate::error::{RaksError, Result};
use crate::search::{Engine, Query, QueryResult, SearchParams};
use crate::text::NodeTextIndex;

/// Parses `central;central<TAB>marginal;marginal` lines. Blank lines and lines
/// starting with `#` are skipped; the marginal field may be absent.
pub fn parse_query_file<R: BufRead>(reader: R) -> Result<Vec<Query>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (central, marginal) = line.split_once('\t').unwrap_or((line, ""));
        let split = |s: &str| -> Vec<String> {
            s.split(';').map(str::trim).filter(|k| !k.is_empty()).map(str::to_owned).collect()
        };
        let query = Query::new(split(central), split(marginal))
            .map_err(|e| RaksError::Parse { line: idx + 1, message: e.to_string() })?;
        out.push(query);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Timing {
    pub mean_ms: f64,
    pub stddev_ms: f64,
}

impl Timing {
    pub fn from_samples(samples: &[Duration]) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        let ms: Vec<f64> = samples.iter().map(|d| d.as_secs_f64() * 1e3).collect();
        let mean = ms.iter().sum::<f64>() / ms.len() as f64;
        let var = ms.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / ms.len() as f64;
        Self { mean_ms: mean, stddev_ms: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub query: usize,
    pub threads: usize,
    pub central: Timing,
    pub marginal: Timing,
    pub total: Timing,
    pub results: usize,
}

/// Runs every query `reps` times per thread count. Fails if any run returns a
/// different ranked list from the first run of that query.
pub fn run_bench(
    engine: &Engine<'_>,
    text: &NodeTextIndex,
    queries: &[Query],
    threads: &[usize],
    reps: usize,
    base: &SearchParams,
) -> Result<Vec<BenchRow>> {
    if reps == 0 || threads.is_empty() {
        return Err(RaksError::InvalidParams("need at least one repetition and thread count".into()));
    }
    let mut rows = Vec::with_capacity(queries.len() * threads.len());
    for (qi, query) in queries.iter().enumerate() {
        let resolved = query.resolve(text)?;
        let mut reference: Option<Vec<QueryResult>> = None;
        for &t in threads {
            let params = SearchParams { threads: t, ..base.clone() };
            let (mut central, mut marginal, mut total) = (Vec::new(), Vec::new(), Vec::new());
            let mut count = 0;
            for _ in 0..reps {
                let outcome = engine.search(&resolved, &params)?;
                let c = outcome.central.elapsed;
                let m = outcome.marginal.as_ref().map_or(Duration::ZERO, |r| r.elapsed);
                central.push(c);
                marginal.push(m);
                total.push(c + m);
                count = outcome.results.len();
                match &reference {
                    None => reference = Some(outcome.results),
                    Some(r) if *r != outcome.results => {
                        return Err(RaksError::Internal(format!(
                            "query {} returned different results with {t} threads",
                            qi + 1
                        )))
                    }
                    Some(_) => {}
                }
            }
            rows.push(BenchRow {
                query: qi + 1,
                threads: t,
                central: Timing::from_samples(&central),
                marginal: Timing::from_samples(&marginal),
                total: Timing::from_samples(&total),
                results: count,
            });
        }
    }
    Ok(rows)
}
