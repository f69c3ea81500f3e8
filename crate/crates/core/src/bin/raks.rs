use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use raks::bench::{parse_query_file, run_bench};
use raks::gen::{generate, write_files, GenParams};
use raks::graph::parse_triples;
use raks::output::{render_dot, render_text, ParamsEcho, QueryEcho, RenderContext, ResultDocument};
use raks::search::{Engine, Query, SearchParams, Termination};
use raks::store::{load_index, save_index, IndexBundle};
use raks::text::parse_node_texts;
use raks::weighting::{histogram, HopSampling};
use raks::{Combination, ScoreParams};

#[derive(Parser)]
#[command(name = "raks", version, about = "Radial pattern keyword search over knowledge graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a binary index from an edge list and node texts.
    Build(BuildArgs),
    /// Print graph, hop and weight statistics of an index.
    Stats {
        #[arg(long)]
        index: PathBuf,
    },
    /// Run one query against an index.
    Query(QueryArgs),
    /// Write a synthetic edge list and node text file.
    Gen(GenArgs),
    /// Time queries across thread counts.
    Bench(BenchArgs),
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    texts: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 10_000)]
    sample_pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum CombinationArg {
    Additive,
    Multiplicative,
}

#[derive(Clone, Copy, ValueEnum)]
enum TerminationArg {
    Conservative,
    Inequality,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    /// Central keyword; repeat for several.
    #[arg(long, required = true)]
    central: Vec<String>,
    /// Marginal keyword; repeat for several.
    #[arg(long)]
    marginal: Vec<String>,
    #[arg(long, default_value_t = 20)]
    topk: usize,
    /// Recoarsen with this alpha instead of the one stored in the index.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 20)]
    max_level: u32,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = 500.0)]
    time_limit_s: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, hide = true)]
    beam: Option<usize>,
    #[arg(long, hide = true, value_enum, default_value_t = CombinationArg::Additive)]
    combination: CombinationArg,
    #[arg(long, hide = true, value_enum, default_value_t = TerminationArg::Conservative)]
    termination: TerminationArg,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long)]
    edges: usize,
    #[arg(long, default_value_t = 10)]
    labels: usize,
    #[arg(long, default_value_t = 1.0)]
    skew: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    /// Comma-separated thread counts.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    threads: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 20)]
    topk: usize,
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn cmd_build(args: &BuildArgs) -> anyhow::Result<()> {
    let edges = File::open(&args.edges).with_context(|| format!("opening {}", args.edges.display()))?;
    let triples = parse_triples(BufReader::new(edges)).context("reading edge file")?;
    info!("read {} triples", triples.len());
    let texts = &args.texts;
    let bundle = IndexBundle::build(
        &triples,
        |g| match texts {
            Some(path) => parse_node_texts(BufReader::new(File::open(path)?), g),
            None => Ok(Vec::new()),
        },
        args.alpha,
        HopSampling::Random { pairs: args.sample_pairs, seed: args.seed },
    )?;
    save_index(&args.out, &bundle).with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "nodes {}\tedges {}\tlabels {}\tavg_hops {:.2}\tstddev {:.2}\tpairs {}",
        bundle.graph.node_count(),
        bundle.graph.edge_count(),
        bundle.graph.label_count(),
        bundle.hops.mean,
        bundle.hops.stddev,
        bundle.hops.pairs
    );
    Ok(())
}

fn cmd_stats(index: &PathBuf) -> anyhow::Result<()> {
    let b = load_index(index).with_context(|| format!("loading {}", index.display()))?;
    let mut out = io::stdout().lock();
    writeln!(out, "nodes\t{}", b.graph.node_count())?;
    writeln!(out, "edges\t{}", b.graph.edge_count())?;
    writeln!(out, "labels\t{}", b.graph.label_count())?;
    writeln!(out, "tokens\t{}", b.text.token_count())?;
    writeln!(out, "avg_hops\t{:.4}", b.hops.mean)?;
    writeln!(out, "stddev\t{:.4}", b.hops.stddev)?;
    writeln!(out, "hop_pairs\t{}", b.hops.pairs)?;
    writeln!(out, "alpha\t{}", b.coarsening.alpha())?;
    writeln!(out, "weight_histogram")?;
    let bins = 10;
    for (i, c) in histogram(&b.weights.scaled, bins).iter().enumerate() {
        writeln!(out, "  [{:.1}, {:.1}{}\t{c}", i as f64 / 10.0, (i + 1) as f64 / 10.0, if i + 1 == bins { "]" } else { ")" })?;
    }
    writeln!(out, "activation_histogram")?;
    let mut levels = vec![0usize; b.coarsening.max_level() as usize + 1];
    for &a in b.activations.as_slice() {
        levels[a as usize] += 1;
    }
    for (a, c) in levels.iter().enumerate() {
        writeln!(out, "  {a}\t{c}")?;
    }
    Ok(())
}

fn search_params(args: &QueryArgs) -> anyhow::Result<SearchParams> {
    let combination = match args.combination {
        CombinationArg::Additive => Combination::Additive,
        CombinationArg::Multiplicative => Combination::Multiplicative,
    };
    if !(args.time_limit_s > 0.0 && args.time_limit_s.is_finite()) {
        bail!("--time-limit-s must be positive");
    }
    let params = SearchParams {
        topk: args.topk,
        beam: args.beam.unwrap_or(args.topk),
        score: ScoreParams::new(args.gamma, combination)?,
        max_level: args.max_level,
        threads: args.threads.unwrap_or_else(default_threads),
        time_limit: Some(Duration::from_secs_f64(args.time_limit_s)),
        termination: match args.termination {
            TerminationArg::Conservative => Termination::Conservative,
            TerminationArg::Inequality => Termination::Inequality,
        },
    };
    params.validate()?;
    Ok(params)
}

fn cmd_query(args: &QueryArgs) -> ExitCode {
    let echo = QueryEcho { central: args.central.clone(), marginal: args.marginal.clone() };
    let fallback = ParamsEcho::new(&SearchParams::default(), args.alpha);
    let fail = |params: ParamsEcho, err: String| {
        eprintln!("error: {err}");
        if let Format::Json = args.format {
            let doc = ResultDocument::from_errors(echo.clone(), params, vec![err]);
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
        }
        ExitCode::from(1)
    };
    let params = match search_params(args) {
        Ok(p) => p,
        Err(e) => return fail(fallback, format!("{e:#}")),
    };
    let params_echo = ParamsEcho::new(&params, args.alpha);
    let bundle = match load_index(&args.index) {
        Ok(b) => b,
        Err(e) => return fail(params_echo, format!("loading {}: {e}", args.index.display())),
    };
    let activations = match args.alpha {
        Some(alpha) => match bundle.with_alpha(alpha) {
            Ok(a) => a,
            Err(e) => return fail(params_echo, e.to_string()),
        },
        None => bundle.activations.clone(),
    };
    let resolved = match Query::new(args.central.clone(), args.marginal.clone()).and_then(|q| q.resolve(&bundle.text)) {
        Ok(r) => r,
        Err(e) => return fail(params_echo, e.to_string()),
    };
    let engine = Engine::new(&bundle.graph, &activations, &bundle.weights);
    let outcome = match engine.search(&resolved, &params) {
        Ok(o) => o,
        Err(e) => return fail(params_echo, e.to_string()),
    };
    for d in &outcome.diagnostics {
        eprintln!("note: {d}");
    }
    let ctx = RenderContext {
        graph: &bundle.graph,
        text: &bundle.text,
        weights: &bundle.weights,
        activations: &activations,
    };
    let doc = ResultDocument::from_outcome(&ctx, echo.clone(), params_echo, &outcome);
    let rendered = match args.format {
        Format::Json => serde_json::to_string_pretty(&doc).expect("serializable") + "\n",
        Format::Dot => render_dot(&ctx, &outcome.results),
        Format::Text => render_text(&doc),
    };
    if io::stdout().lock().write_all(rendered.as_bytes()).is_err() {
        return ExitCode::from(1);
    }
    if outcome.results.is_empty() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_gen(args: &GenArgs) -> anyhow::Result<()> {
    let params = GenParams {
        nodes: args.nodes,
        edges: args.edges,
        labels: args.labels,
        skew: args.skew,
        seed: args.seed,
    };
    let graph = generate(&params)?;
    let (edges, texts) = write_files(&graph, &args.out_prefix)?;
    println!("{}\n{}", edges.display(), texts.display());
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> anyhow::Result<()> {
    let bundle = load_index(&args.index).with_context(|| format!("loading {}", args.index.display()))?;
    let queries = parse_query_file(BufReader::new(File::open(&args.queries)?))?;
    let base = SearchParams::default().with_topk(args.topk);
    let rows = run_bench(&bundle.engine(), &bundle.text, &queries, &args.threads, args.reps, &base)?;
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "query\tthreads\tcentral_ms\tcentral_sd\tmarginal_ms\tmarginal_sd\ttotal_ms\ttotal_sd\tresults"
    )?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{:.3}\t{:.3}\t{:.3}\t{:.3}\t{:.3}\t{:.3}\t{}",
            r.query,
            r.threads,
            r.central.mean_ms,
            r.central.stddev_ms,
            r.marginal.mean_ms,
            r.marginal.stddev_ms,
            r.total.mean_ms,
            r.total.stddev_ms,
            r.results
        )?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Stats { index } => cmd_stats(index),
        Command::Query(a) => return cmd_query(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
