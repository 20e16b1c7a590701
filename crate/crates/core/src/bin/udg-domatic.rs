//! Command-line front end. Every subcommand prints one JSON line on
//! standard output. Exit codes: 0 success, 1 domain failure, 2 usage error.
//! All randomness derives from `--seed`, so identical flags reproduce
//! identical output files.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use udg_domatic::adapt::{self, ThinningMode, ThinningStrategy};
use udg_domatic::experiment::{run_experiment_to_dir, ExperimentConfig, SKIPPED};
use udg_domatic::generator::{self, Band, GeneratorParams, SeedSearchTargets, DEFAULT_GRID_RESOLUTION};
use udg_domatic::io::{read_graph, write_graph};
use udg_domatic::lp::export_lp;
use udg_domatic::metrics::coverage_errors;
use udg_domatic::model::{build_model, CapacityMode, CostVector, Formulation, IlpModel, PartitionAssignment};
use udg_domatic::solver::{check, solve, SolveLimits, SolveStatus};
use udg_domatic::{Error, GeometricGraph, Result};

#[derive(Parser)]
#[command(name = "udg-domatic", version, about = "Lambda-precision unit disk graphs and soft domatic partitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Place nodes on the grid and write the graph JSON.
    Generate(GenerateArgs),
    /// Search (lambda, r_tr) for a target coverage and degree.
    SeedSearch(SeedSearchArgs),
    /// Connect, debridge and/or thin a graph.
    Adapt(AdaptArgs),
    /// Solve a partition model on a graph.
    Partition(PartitionArgs),
    /// Write a partition model in LP format.
    ExportLp(ExportArgs),
    /// Run a batch experiment from a JSON config.
    Experiment(ExperimentArgs),
    /// Re-validate an assignment against a graph.
    Check(CheckArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    rtr: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION)]
    grid: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Retry until all nodes are placed and the graph is connected.
    #[arg(long)]
    require_connected: bool,
    #[arg(long, default_value_t = 1000)]
    max_attempts: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SeedSearchArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long)]
    deg: f64,
    #[arg(long, default_value_t = 0.25)]
    deg_width: f64,
    #[arg(long, default_value_t = 0.75)]
    coverage_lo: f64,
    #[arg(long, default_value_t = 0.80)]
    coverage_hi: f64,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 40)]
    max_probes: usize,
    #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION)]
    grid: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seed table CSV to write the row to.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    LongestFirst,
    LengthWeighted,
    Uniform,
}

#[derive(Args)]
struct AdaptArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Join components by their nearest node pairs.
    #[arg(long)]
    connect: bool,
    /// Remove every bridge by adding edges.
    #[arg(long)]
    debridge: bool,
    /// Thin edges down to this average degree.
    #[arg(long)]
    thin_to: Option<f64>,
    #[arg(long, value_enum, default_value = "length-weighted")]
    mode: ModeArg,
    #[arg(long, default_value_t = 2.0)]
    exponent: f64,
    #[arg(long)]
    allow_disconnect: bool,
    #[arg(long)]
    forbid_new_bridges: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Feasible,
    Optimal,
    Maximal,
}

impl From<ObjectiveArg> for Formulation {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Feasible => Formulation::Feasibility,
            ObjectiveArg::Optimal => Formulation::OptimalSoft,
            ObjectiveArg::Maximal => Formulation::MaximalSoft,
        }
    }
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "optimal")]
    objective: ObjectiveArg,
    /// Means per node.
    #[arg(long, conflicts_with = "costs")]
    k: Option<usize>,
    /// Comma-separated per-mean costs in (0, 1].
    #[arg(long, value_delimiter = ',')]
    costs: Option<Vec<f64>>,
    /// Let cost sums fall short of 1.
    #[arg(long, requires = "costs")]
    relaxed_cost: bool,
}

impl ModelArgs {
    fn capacity(&self) -> Result<CapacityMode> {
        Ok(match (&self.k, &self.costs) {
            (Some(k), _) => CapacityMode::FixedK { k: *k },
            (None, Some(c)) => CapacityMode::Cost { costs: CostVector::new(c.clone())?, relaxed: self.relaxed_cost },
            (None, None) => CapacityMode::ExactlyOne,
        })
    }

    fn build(&self) -> Result<(GeometricGraph, IlpModel)> {
        let g = read_graph(&self.graph)?;
        let model = build_model(&g, self.n, self.objective.into(), self.capacity()?)?;
        Ok((g, model))
    }
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Seconds.
    #[arg(long, default_value_t = 1200.0)]
    time_limit: f64,
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Defaults to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Concurrent solves; defaults to the config value or every core.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Partition report or bare `{"n": .., "assign": ..}` document.
    #[arg(long)]
    assignment: PathBuf,
}

/// Exit 1 with this summary on standard output.
struct DomainFailure(Value);

enum Outcome {
    Done(Value),
    Failed(DomainFailure),
}

fn generate(a: &GenerateArgs) -> Result<Outcome> {
    let params = GeneratorParams::new(a.nodes, a.lambda, a.rtr).with_grid(a.grid).with_seed(a.seed);
    params.validate()?;
    let (graph, coverage, attempts) = if a.require_connected {
        let mut rng = params.rng();
        let c = generator::generate_connected(&params, &mut rng, a.max_attempts)?;
        (c.graph, c.coverage, c.attempts)
    } else {
        let p = generator::place_nodes_seeded(&params)?;
        (p.graph, p.coverage, 1)
    };
    write_graph(&a.out, &graph)?;
    Ok(Outcome::Done(json!({
        "nodes": graph.node_count(),
        "requested": a.nodes,
        "edges": graph.edge_count(),
        "coverage": coverage,
        "avg_degree": graph.avg_degree(),
        "connected": graph.is_connected(),
        "attempts": attempts,
        "out": a.out,
    })))
}

fn seed_search(a: &SeedSearchArgs) -> Result<Outcome> {
    let mut targets = SeedSearchTargets::new(a.nodes, a.deg);
    targets.deg_band = Band::new(a.deg, a.deg + a.deg_width);
    targets.coverage_band = Band::new(a.coverage_lo, a.coverage_hi);
    targets.sample_size = a.samples;
    targets.max_probes = a.max_probes;
    targets.grid_resolution = a.grid;
    let row = generator::seed_search(&targets, &mut ChaCha8Rng::seed_from_u64(a.seed))?;
    if let Some(out) = &a.out {
        generator::write_seed_table(std::fs::File::create(out)?, &[row])?;
    }
    Ok(Outcome::Done(serde_json::to_value(row)?))
}

fn adapt_graph(a: &AdaptArgs) -> Result<Outcome> {
    let mut g = read_graph(&a.graph)?;
    let before = g.edge_count();
    if a.connect {
        g = adapt::connect_components(&g);
    }
    if a.debridge {
        g = adapt::eliminate_bridges(&g)?;
    }
    if let Some(target) = a.thin_to {
        let mode = match a.mode {
            ModeArg::LongestFirst => ThinningMode::LongestFirst,
            ModeArg::LengthWeighted => ThinningMode::LengthWeightedRandom { exponent: a.exponent },
            ModeArg::Uniform => ThinningMode::UniformRandom,
        };
        let strategy =
            ThinningStrategy { mode, forbid_disconnect: !a.allow_disconnect, forbid_new_bridges: a.forbid_new_bridges };
        g = adapt::thin_to_degree(&g, target, &strategy, &mut ChaCha8Rng::seed_from_u64(a.seed))?;
    }
    write_graph(&a.out, &g)?;
    Ok(Outcome::Done(json!({
        "edges_before": before,
        "edges": g.edge_count(),
        "avg_degree": g.avg_degree(),
        "connected": g.is_connected(),
        "bridges": g.bridges().len(),
        "out": a.out,
    })))
}

fn partition(a: &PartitionArgs) -> Result<Outcome> {
    let (g, model) = a.model.build()?;
    let limits = SolveLimits { time_limit: a.time_limit, node_limit: a.node_limit, threads: a.threads };
    limits.validate()?;
    let report = solve(&model, &limits);
    let errors = report.assignment.as_ref().map(|asg| coverage_errors(&g, asg)).transpose()?;
    let mut doc = serde_json::to_value(&report)?;
    doc["errors"] = serde_json::to_value(&errors)?;
    if let Some(out) = &a.out {
        std::fs::write(out, format!("{doc}\n"))?;
    }
    let summary = json!({
        "status": report.status,
        "objective": report.objective,
        "best_bound": report.best_bound,
        "wall_time": report.wall_time,
        "explored_nodes": report.explored_nodes,
        "miss_cov": errors.as_ref().map(|e| e.miss_cov),
        "inc_nodes": errors.as_ref().map(|e| e.inc_nodes),
        "message": report.message,
    });
    Ok(match report.status {
        SolveStatus::Optimal | SolveStatus::FeasibleTimeLimit => Outcome::Done(summary),
        _ => Outcome::Failed(DomainFailure(summary)),
    })
}

fn export(a: &ExportArgs) -> Result<Outcome> {
    let (_, model) = a.model.build()?;
    let text = export_lp(&model);
    match &a.out {
        Some(out) => {
            std::fs::write(out, &text)?;
            Ok(Outcome::Done(json!({
                "variables": model.variables.len(),
                "constraints": model.constraints.len(),
                "out": out,
            })))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(Outcome::Done(Value::Null))
        }
    }
}

fn experiment(a: &ExperimentArgs) -> Result<Outcome> {
    let mut config = ExperimentConfig::from_json(&std::fs::read_to_string(&a.config)?)?;
    if let Some(t) = a.threads {
        config.workers = t;
    }
    let (records, agg) = run_experiment_to_dir(&config, &a.out_dir)?;
    let solved = records.iter().filter(|r| r.status != SKIPPED).count();
    let summary = json!({
        "records": records.len(),
        "solved": solved,
        "skipped": records.len() - solved,
        "optimal": records.iter().filter(|r| r.is_optimal()).count(),
        "groups": agg.times.len(),
        "out_dir": a.out_dir,
    });
    Ok(if solved == 0 { Outcome::Failed(DomainFailure(summary)) } else { Outcome::Done(summary) })
}

fn read_assignment(path: &Path) -> Result<PartitionAssignment> {
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let inner = match doc.get("assignment") {
        Some(a) if a.is_null() => return Err(Error::InvalidInput("report carries no assignment".into())),
        Some(a) => a.clone(),
        None => doc,
    };
    let raw: PartitionAssignment = serde_json::from_value(inner)?;
    PartitionAssignment::new(raw.n, raw.assign)
}

fn check_assignment(a: &CheckArgs) -> Result<Outcome> {
    let (g, model) = a.model.build()?;
    let assignment = read_assignment(&a.assignment)?;
    let errors = coverage_errors(&g, &assignment)?;
    let verdict = check::verify(&model, &assignment);
    let summary = json!({
        "valid": verdict.is_ok(),
        "objective": verdict.as_ref().ok(),
        "violation": verdict.as_ref().err().map(|e| e.to_string()),
        "miss_cov": errors.miss_cov,
        "inc_nodes": errors.inc_nodes,
    });
    Ok(if verdict.is_ok() { Outcome::Done(summary) } else { Outcome::Failed(DomainFailure(summary)) })
}

fn error_json(e: &Error) -> Value {
    let mut v = json!({ "error": e.kind(), "message": e.to_string() });
    match e {
        Error::UnreachableTarget { attempts, saturated, disconnected, .. } => {
            v["attempts"] = json!(attempts);
            v["saturated"] = json!(saturated);
            v["disconnected"] = json!(disconnected);
        }
        Error::SearchFailed { best } => {
            v["best"] = json!({
                "lambda": best.lambda,
                "r_tr": best.r_tr,
                "mean_coverage": best.mean_coverage,
                "mean_avg_degree": best.mean_avg_degree,
                "probes": best.probes,
            });
        }
        _ => {}
    }
    v
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::SeedSearch(a) => seed_search(a),
        Command::Adapt(a) => adapt_graph(a),
        Command::Partition(a) => partition(a),
        Command::ExportLp(a) => export(a),
        Command::Experiment(a) => experiment(a),
        Command::Check(a) => check_assignment(a),
    };
    match result {
        Ok(Outcome::Done(Value::Null)) => ExitCode::SUCCESS,
        Ok(Outcome::Done(v)) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::Failed(DomainFailure(v))) => {
            println!("{v}");
            ExitCode::from(1)
        }
        Err(e) => {
            println!("{}", error_json(&e));
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
