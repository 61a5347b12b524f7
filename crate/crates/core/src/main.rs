//! Command-line surface over the library: sampling, ranking, decomposition,
//! estimator evaluation, sweeps, simulated ensembles, and dataset ingestion.
//!
//! Every invocation is a pure function of its flags and input files. Seeds
//! are explicit; `--seed` falls back to the `HODGE_SEED` environment variable
//! and then to 0. Errors exit nonzero with a single `error[<code>]: ...` line
//! on stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hodgelab::experiments::{self, ExperimentConfig, Metric, SchemeTemplate};
use hodgelab::graph::PairGraph;
use hodgelab::sampling::{self, SamplerSpec, Scheme};
use hodgelab::{hodge, io, spectral};
use hodgelab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hodgelab",
    version,
    about = "Ranking and sampling laboratory for pairwise comparisons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a comparison graph and write `<out>.csv` + `<out>.json`.
    Sample(SampleArgs),
    /// Rank a graph: global scores plus stability numbers as JSON.
    Rank(RankArgs),
    /// Split the mean flow into gradient, harmonic, and curl parts.
    Decompose(DecomposeArgs),
    /// Evaluate the closed-form Fiedler-value estimators at one p0.
    Estimate(EstimateArgs),
    /// Sweep measured and estimated normalized Fiedler values over p0.
    Sweep(SweepArgs),
    /// Run a simulated Monte-Carlo ensemble and write the result table.
    Simulate(SimulateArgs),
    /// Aggregate a record file into the full graph and rank it.
    Ingest(IngestArgs),
}

fn default_seed() -> u64 {
    std::env::var("HODGE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

#[derive(Args)]
struct SampleArgs {
    /// with | without | greedy | two-stage
    #[arg(long)]
    scheme: String,
    /// Number of vertices.
    #[arg(long)]
    n: usize,
    /// Edge budget; exactly one of --m / --p0.
    #[arg(long, conflicts_with = "p0")]
    m: Option<usize>,
    /// Connectivity multiple; converted to m = ceil(p0 (n-1) ln(n) / 2).
    #[arg(long)]
    p0: Option<f64>,
    /// Greedy-to-uniform switch point for the two-stage scheme.
    #[arg(long)]
    transition_p0: Option<f64>,
    /// RNG seed (default: $HODGE_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output path prefix.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RankArgs {
    /// Comparison-record CSV (i,j,value,annotator).
    #[arg(long, conflicts_with = "graph")]
    records: Option<PathBuf>,
    /// Graph export prefix or edge-list CSV. Without a `mean` column the
    /// flow is zero and so are the scores.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Vertex count (default: largest index + 1).
    #[arg(long)]
    n: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long, conflicts_with = "graph")]
    records: Option<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Connectivity multiple.
    #[arg(long)]
    p0: f64,
    /// Also evaluate the finite-size estimates a1 and a2 at this n.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    n: usize,
    /// Grid: comma list `1.5,2,4` or doubling range `1.5:16`.
    #[arg(long)]
    p0: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma list of schemes (default: with,without,greedy).
    #[arg(long, default_value = "with,without,greedy")]
    schemes: String,
    /// Bound internal parallelism; results are identical for any value.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Ensemble config JSON; overrides the individual flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Outlier percentage in [0, 0.5].
    #[arg(long, default_value_t = 0.0)]
    op: f64,
    #[arg(long, default_value = "1.5,2,3,4,6")]
    p0: String,
    #[arg(long, default_value = "with,without,greedy")]
    schemes: String,
    /// Switch point used by any two-stage template in --schemes.
    #[arg(long)]
    transition_p0: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fit a least-squares scale to the estimate before the L2 metric.
    #[arg(long)]
    rescale: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    n: usize,
    /// Scores JSON for the full-data reference ranking (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also export the aggregated graph as `<prefix>.csv` with a mean column.
    #[arg(long)]
    graph_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let msg = err.to_string().replace('\n', " ");
            eprintln!("error[{}]: {}", err.code(), msg);
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample(args) => cmd_sample(args),
        Command::Rank(args) => cmd_rank(args),
        Command::Decompose(args) => cmd_decompose(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Ingest(args) => cmd_ingest(args),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_schemes(s: &str) -> Result<Vec<Scheme>> {
    s.split(',')
        .map(|part| part.trim().parse())
        .collect::<Result<Vec<_>>>()
}

/// Comma list, or `start:end` meaning doubling steps from `start` with `end`
/// appended when not already reached.
fn parse_p0_grid(s: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::InvalidInput(format!("cannot parse p0 grid '{s}': {what}"));
    if let Some((a, b)) = s.split_once(':') {
        let start: f64 = a.trim().parse().map_err(|_| bad("bad start"))?;
        let end: f64 = b.trim().parse().map_err(|_| bad("bad end"))?;
        if !(start > 0.0 && end >= start) {
            return Err(bad("need 0 < start <= end"));
        }
        let mut grid = Vec::new();
        let mut v = start;
        while v <= end * (1.0 + 1e-12) {
            grid.push(v);
            v *= 2.0;
        }
        if let Some(&last) = grid.last() {
            if end > last * (1.0 + 1e-12) {
                grid.push(end);
            }
        }
        Ok(grid)
    } else {
        s.split(',')
            .map(|part| {
                part.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(&format!("bad entry '{part}'")))
            })
            .collect()
    }
}

fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    match threads {
        Some(t) if t >= 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(f),
        Some(t) => Err(Error::InvalidInput(format!(
            "--threads must be >= 1, got {t}"
        ))),
        None => f(),
    }
}

fn cmd_sample(args: SampleArgs) -> Result<()> {
    let scheme: Scheme = args.scheme.parse()?;
    let m = match (args.m, args.p0) {
        (Some(m), None) => m,
        (None, Some(p0)) => {
            if p0.is_nan() || p0 <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "--p0 must be positive, got {p0}"
                )));
            }
            spectral::budget_for_p0(args.n, p0)
        }
        _ => {
            return Err(Error::InvalidInput(
                "exactly one of --m / --p0 is required".to_string(),
            ))
        }
    };
    let mut spec = SamplerSpec::new(scheme, args.n, m, args.seed.unwrap_or_else(default_seed));
    spec.transition_p0 = args.transition_p0;
    let graph = sampling::sample(&spec)?;
    io::write_graph(&args.out, &graph, &io::GraphSidecar::from(&spec))
}

/// Load a graph either by aggregating records or from an edge-list export.
fn load_graph(records: Option<&Path>, graph: Option<&Path>, n: Option<usize>) -> Result<PairGraph> {
    match (records, graph) {
        (Some(path), None) => {
            let records = io::read_records_csv(path)?;
            let n =
                n.unwrap_or_else(|| records.iter().map(|r| r.i.max(r.j) + 1).max().unwrap_or(0));
            PairGraph::from_records(n, &records)
        }
        (None, Some(path)) => {
            let csv_path = if path.extension().is_some_and(|e| e == "csv") {
                path.to_path_buf()
            } else {
                PathBuf::from(format!("{}.csv", path.display()))
            };
            io::read_graph_csv(&csv_path, n)
        }
        _ => Err(Error::InvalidInput(
            "exactly one of --records / --graph is required".to_string(),
        )),
    }
}

fn cmd_rank(args: RankArgs) -> Result<()> {
    let graph = load_graph(args.records.as_deref(), args.graph.as_deref(), args.n)?;
    let score = hodge::hodge_rank(&graph)?;
    let lambda2 = spectral::fiedler(&graph)?.fiedler_value;
    emit(
        args.out.as_deref(),
        &io::score_json(&score, lambda2, 1.0 / lambda2),
    )
}

fn cmd_decompose(args: DecomposeArgs) -> Result<()> {
    let graph = load_graph(args.records.as_deref(), args.graph.as_deref(), args.n)?;
    let decomposition = hodge::hodge_decompose(&graph)?;
    emit(
        args.out.as_deref(),
        &io::decomposition_json(&graph, &decomposition),
    )
}

fn cmd_estimate(args: EstimateArgs) -> Result<()> {
    let a = spectral::solve_a(args.p0)?;
    let text = match args.n {
        None => format!(
            "p0,a_theorem1\n{},{}\n",
            io::fmt_f64(args.p0),
            io::fmt_f64(a)
        ),
        Some(n) => {
            let inputs = spectral::EstimatorInputs::from_p0(n, args.p0)?;
            let a1 = spectral::estimate_with_replacement(&inputs)?;
            // a2 only exists up to the complete graph; the field stays empty
            // beyond it.
            let a2 = if inputs.p <= 1.0 {
                io::fmt_f64(spectral::estimate_without_replacement(&inputs)?)
            } else {
                String::new()
            };
            format!(
                "p0,n,a_theorem1,a1,a2\n{},{},{},{},{}\n",
                io::fmt_f64(args.p0),
                n,
                io::fmt_f64(a),
                io::fmt_f64(a1),
                a2
            )
        }
    };
    emit(args.out.as_deref(), &text)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let schemes = parse_schemes(&args.schemes)?;
    let grid = parse_p0_grid(&args.p0)?;
    let seed = args.seed.unwrap_or_else(default_seed);
    let rows = with_threads(args.threads, || {
        experiments::fiedler_sweep(args.n, &grid, args.trials, seed, &schemes)
    })?;
    emit(args.out.as_deref(), &io::sweep_csv(&rows))
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let config = match &args.config {
        Some(path) => io::read_config_json(path)?,
        None => {
            let schemes = parse_schemes(&args.schemes)?;
            let sampler_grid = schemes
                .into_iter()
                .map(|scheme| SchemeTemplate {
                    scheme,
                    transition_p0: if scheme == Scheme::TwoStage {
                        args.transition_p0
                    } else {
                        None
                    },
                })
                .collect();
            ExperimentConfig {
                n: args.n,
                sampler_grid,
                p0_grid: parse_p0_grid(&args.p0)?,
                trials: args.trials,
                outlier_percentage: args.op,
                base_seed: args.seed.unwrap_or_else(default_seed),
                metric: if args.rescale {
                    Metric::L2CenteredRescaled
                } else {
                    Metric::L2Centered
                },
            }
        }
    };
    let cells = with_threads(args.threads, || experiments::run_ensemble(&config))?;
    emit(args.out.as_deref(), &io::result_csv(&cells))
}

fn cmd_ingest(args: IngestArgs) -> Result<()> {
    let (graph, score) = experiments::ingest_dataset(&args.records, args.n)?;
    if let Some(prefix) = &args.graph_out {
        // Extended edge list carrying the aggregated mean flows, so the
        // export can be ranked directly via `rank --graph`.
        let mut text = String::from("i,j,weight,mean\n");
        for (i, j, e) in graph.edges() {
            text.push_str(&format!(
                "{i},{j},{},{}\n",
                io::fmt_f64(e.weight),
                io::fmt_f64(e.mean)
            ));
        }
        std::fs::write(PathBuf::from(format!("{}.csv", prefix.display())), text)?;
    }
    let lambda2 = spectral::fiedler(&graph)?.fiedler_value;
    emit(
        args.out.as_deref(),
        &io::score_json(&score, lambda2, 1.0 / lambda2),
    )
}
