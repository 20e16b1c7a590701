//! Batch experiments: generate graphs per seed row, adapt them into the SG1
//! and SG2 setups, solve every (graph, n, objective) combination and
//! aggregate the recomputed error metrics.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adapt::{eliminate_bridges, thin_edges, ThinningStrategy};
use crate::error::{Error, Result};
use crate::generator::{generate_connected, SeedTableRow, DEFAULT_GRID_RESOLUTION};
use crate::graph::GeometricGraph;
use crate::metrics::coverage_errors;
use crate::model::{build_model, CapacityMode, Formulation};
use crate::solver::{solve, SolveLimits};

pub const SKIPPED: &str = "skipped";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Thin to the expected degree without disconnecting.
    #[serde(rename = "SG1")]
    Sg1,
    /// Remove all bridges first, then thin without creating new ones.
    #[serde(rename = "SG2")]
    Sg2,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Sg1 => "SG1",
            Variant::Sg2 => "SG2",
        }
    }
}

fn default_graphs_per_row() -> usize {
    20
}
fn default_partition_sizes() -> Vec<usize> {
    vec![3, 4, 5]
}
fn default_objectives() -> Vec<Formulation> {
    vec![Formulation::OptimalSoft, Formulation::MaximalSoft]
}
fn default_variants() -> Vec<Variant> {
    vec![Variant::Sg1]
}
fn default_max_attempts() -> usize {
    1000
}
fn default_grid() -> usize {
    DEFAULT_GRID_RESOLUTION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed_rows: Vec<SeedTableRow>,
    #[serde(default = "default_graphs_per_row")]
    pub graphs_per_row: usize,
    #[serde(default = "default_partition_sizes")]
    pub partition_sizes: Vec<usize>,
    #[serde(default = "default_objectives")]
    pub objectives: Vec<Formulation>,
    #[serde(default)]
    pub limits: SolveLimits,
    /// Each variant adapts the same generated graphs.
    #[serde(default = "default_variants")]
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: usize,
    #[serde(default = "default_grid")]
    pub grid_resolution: usize,
    /// Concurrent solves; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(seed_rows: Vec<SeedTableRow>) -> Self {
        ExperimentConfig {
            seed_rows,
            graphs_per_row: default_graphs_per_row(),
            partition_sizes: default_partition_sizes(),
            objectives: default_objectives(),
            limits: SolveLimits::default(),
            variants: default_variants(),
            seed: 0,
            max_attempts: default_max_attempts(),
            grid_resolution: default_grid(),
            workers: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seed_rows.is_empty() {
            return Err(Error::invalid("experiment has no seed rows"));
        }
        if self.graphs_per_row == 0 {
            return Err(Error::invalid("graphs_per_row must be at least 1"));
        }
        if self.partition_sizes.is_empty() || self.partition_sizes.iter().any(|&n| n == 0 || n > 64) {
            return Err(Error::invalid("partition sizes must be a non-empty list within 1..=64"));
        }
        if self.objectives.is_empty() || self.objectives.contains(&Formulation::Feasibility) {
            return Err(Error::invalid("objectives must be a non-empty list of optimal/maximal"));
        }
        if self.variants.is_empty() {
            return Err(Error::invalid("no variant selected"));
        }
        if self.max_attempts == 0 {
            return Err(Error::invalid("max_attempts must be at least 1"));
        }
        self.limits.validate()?;
        for row in &self.seed_rows {
            row.params().with_grid(self.grid_resolution).validate()?;
        }
        Ok(())
    }
}

/// One line of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub graph_id: String,
    pub n_nodes: usize,
    pub deg_exp: f64,
    pub avg_degree: Option<f64>,
    pub variant: Variant,
    pub n: usize,
    pub objective: Formulation,
    /// A solver status, or `skipped` when the graph could not be built.
    pub status: String,
    pub objective_value: Option<f64>,
    pub best_bound: Option<f64>,
    pub wall_time_s: Option<f64>,
    pub miss_cov: Option<usize>,
    pub inc_nodes: Option<usize>,
}

impl ResultRecord {
    pub fn is_optimal(&self) -> bool {
        self.status == "optimal"
    }

    fn key(&self) -> (String, Variant, usize, Formulation) {
        (self.graph_id.clone(), self.variant, self.n, self.objective)
    }
}

/// SplitMix64 finaliser over a seed and a path of indices.
fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let mut z = seed;
    for &p in path {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(p.wrapping_mul(0xD1B5_4A32_D192_ED03));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// Adapt a connected graph for one variant; reaching the degree target is
/// best effort, the measured degree is what gets recorded.
pub fn adapt_for_variant(g: &GeometricGraph, deg_exp: f64, variant: Variant, seed: u64) -> Result<GeometricGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (base, strategy) = match variant {
        Variant::Sg1 => (g.clone(), ThinningStrategy::squared_length()),
        Variant::Sg2 => (eliminate_bridges(g)?, ThinningStrategy::squared_length().forbidding_new_bridges()),
    };
    if base.avg_degree() <= deg_exp {
        return Ok(base);
    }
    Ok(thin_edges(&base, deg_exp, &strategy, &mut rng)?.graph)
}

struct Built {
    row: usize,
    index: usize,
    variant: Variant,
    graph: Option<GeometricGraph>,
}

fn graph_id(row: usize, index: usize) -> String {
    format!("r{row}-g{index}")
}

/// Run the batch, handing each record to `sink` as soon as it is produced
/// (in completion order). Returns all records in task order.
pub fn run_experiment(
    config: &ExperimentConfig,
    mut sink: impl FnMut(&ResultRecord) -> Result<()>,
) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;

    let jobs: Vec<(usize, usize)> = (0..config.seed_rows.len())
        .flat_map(|r| (0..config.graphs_per_row).map(move |k| (r, k)))
        .collect();
    let built: Vec<Built> = pool.install(|| {
        jobs.par_iter()
            .flat_map_iter(|&(r, k)| {
                let row = &config.seed_rows[r];
                let gseed = derive_seed(config.seed, &[r as u64, k as u64]);
                let params = row.params().with_grid(config.grid_resolution).with_seed(gseed);
                let mut rng = ChaCha8Rng::seed_from_u64(gseed);
                let base = generate_connected(&params, &mut rng, config.max_attempts).ok();
                config
                    .variants
                    .iter()
                    .map(|&variant| {
                        let aseed = derive_seed(gseed, &[variant as u64 + 1]);
                        let graph =
                            base.as_ref().and_then(|b| adapt_for_variant(&b.graph, row.deg_exp, variant, aseed).ok());
                        Built { row: r, index: k, variant, graph }
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    });

    let mut tasks = Vec::new();
    for b in 0..built.len() {
        for &n in &config.partition_sizes {
            for &objective in &config.objectives {
                tasks.push((b, n, objective));
            }
        }
    }
    let solve_task = |&(b, n, objective): &(usize, usize, Formulation)| -> ResultRecord {
        let built = &built[b];
        let row = &config.seed_rows[built.row];
        let mut record = ResultRecord {
            graph_id: graph_id(built.row, built.index),
            n_nodes: row.n_nodes,
            deg_exp: row.deg_exp,
            avg_degree: None,
            variant: built.variant,
            n,
            objective,
            status: SKIPPED.to_string(),
            objective_value: None,
            best_bound: None,
            wall_time_s: None,
            miss_cov: None,
            inc_nodes: None,
        };
        let Some(g) = &built.graph else { return record };
        record.avg_degree = Some(g.avg_degree());
        let model = match build_model(g, n, objective, CapacityMode::ExactlyOne) {
            Ok(m) => m,
            Err(_) => return record,
        };
        let report = solve(&model, &config.limits);
        record.status = report.status.to_string();
        record.objective_value = report.objective;
        record.best_bound = report.best_bound;
        record.wall_time_s = Some(report.wall_time);
        if let Some(a) = &report.assignment {
            if let Ok(e) = coverage_errors(g, a) {
                record.miss_cov = Some(e.miss_cov);
                record.inc_nodes = Some(e.inc_nodes);
            }
        }
        record
    };

    let (tx, rx) = mpsc::channel::<(usize, ResultRecord)>();
    let mut slots: Vec<Option<ResultRecord>> = vec![None; tasks.len()];
    let mut first_error = None;
    std::thread::scope(|scope| {
        scope.spawn(|| {
            pool.install(|| {
                tasks.par_iter().enumerate().for_each_with(tx, |tx, (t, task)| {
                    let _ = tx.send((t, solve_task(task)));
                })
            })
        });
        for (t, record) in rx {
            if first_error.is_none() {
                if let Err(e) = sink(&record) {
                    first_error = Some(e);
                }
            }
            slots[t] = Some(record);
        }
    });
    if let Some(e) = first_error {
        return Err(e);
    }
    Ok(slots.into_iter().map(|r| r.expect("every task reports")).collect())
}

/// Lower-middle element for even counts.
pub fn lower_median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some(values[(values.len() - 1) / 2])
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut count) = (0.0, 0usize);
    for v in values {
        sum += v;
        count += 1;
    }
    (count > 0).then(|| sum / count as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeRow {
    pub variant: Variant,
    pub objective: Formulation,
    pub n: usize,
    pub deg_exp: f64,
    pub n_nodes: usize,
    pub count: usize,
    pub median_wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub variant: Variant,
    pub objective: Formulation,
    pub n: usize,
    pub deg_exp: f64,
    pub n_nodes: usize,
    pub count: usize,
    pub mean_inc_nodes: Option<f64>,
    pub mean_miss_cov: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityRow {
    pub variant: Variant,
    pub objective: Formulation,
    pub deg_exp: f64,
    pub n: usize,
    pub n_nodes: usize,
    pub mean_miss_cov_non_optimal: Option<f64>,
    pub mean_miss_cov_optimal: Option<f64>,
    pub mean_inc_nodes_non_optimal: Option<f64>,
    pub mean_inc_nodes_optimal: Option<f64>,
    pub n_opt: usize,
    pub n_non_opt: usize,
}

/// Paired optimal/maximal comparison on identical graphs, relative to the
/// worst-case error of each graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeRow {
    pub variant: Variant,
    pub pairs: usize,
    /// Mean of `(miss_cov(maximal) - miss_cov(optimal)) / ((n - 1)|V|)`.
    pub p_miss_cov: Option<f64>,
    /// Mean of `(inc_nodes(optimal) - inc_nodes(maximal)) / |V|`.
    pub p_inc_nodes: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregates {
    pub times: Vec<TimeRow>,
    pub errors: Vec<ErrorRow>,
    pub optimality: Vec<OptimalityRow>,
    pub relative: Vec<RelativeRow>,
}

/// Orderable stand-in for `deg_exp` in group keys.
fn deg_key(d: f64) -> u64 {
    d.to_bits()
}

/// Aggregates depend only on the record multiset: records are sorted before
/// any summation.
pub fn aggregate(records: &[ResultRecord]) -> Aggregates {
    let mut sorted: Vec<&ResultRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.key().cmp(&b.key()).then(a.status.cmp(&b.status)));

    type Group = (Variant, Formulation, usize, u64, usize);
    let mut groups: BTreeMap<Group, Vec<&ResultRecord>> = BTreeMap::new();
    for r in &sorted {
        groups.entry((r.variant, r.objective, r.n, deg_key(r.deg_exp), r.n_nodes)).or_default().push(r);
    }

    let mut times = Vec::new();
    let mut errors = Vec::new();
    let mut optimality = Vec::new();
    for (&(variant, objective, n, deg, n_nodes), rs) in &groups {
        let deg_exp = f64::from_bits(deg);
        let solved: Vec<&&ResultRecord> = rs.iter().filter(|r| r.inc_nodes.is_some()).collect();
        let mut walls: Vec<f64> = rs.iter().filter(|r| r.status != SKIPPED).filter_map(|r| r.wall_time_s).collect();
        times.push(TimeRow {
            variant,
            objective,
            n,
            deg_exp,
            n_nodes,
            count: walls.len(),
            median_wall_time_s: lower_median(&mut walls),
        });
        errors.push(ErrorRow {
            variant,
            objective,
            n,
            deg_exp,
            n_nodes,
            count: solved.len(),
            mean_inc_nodes: mean(solved.iter().map(|r| r.inc_nodes.unwrap() as f64)),
            mean_miss_cov: mean(solved.iter().map(|r| r.miss_cov.unwrap() as f64)),
        });
        let (opt, non): (Vec<&ResultRecord>, Vec<&ResultRecord>) = solved.iter().map(|r| **r).partition(|r| r.is_optimal());
        optimality.push(OptimalityRow {
            variant,
            objective,
            deg_exp,
            n,
            n_nodes,
            mean_miss_cov_non_optimal: mean(non.iter().map(|r| r.miss_cov.unwrap() as f64)),
            mean_miss_cov_optimal: mean(opt.iter().map(|r| r.miss_cov.unwrap() as f64)),
            mean_inc_nodes_non_optimal: mean(non.iter().map(|r| r.inc_nodes.unwrap() as f64)),
            mean_inc_nodes_optimal: mean(opt.iter().map(|r| r.inc_nodes.unwrap() as f64)),
            n_opt: opt.len(),
            n_non_opt: non.len(),
        });
    }

    let mut pairs: BTreeMap<(Variant, String, usize), (Option<&ResultRecord>, Option<&ResultRecord>)> =
        BTreeMap::new();
    for r in sorted.iter().filter(|r| r.inc_nodes.is_some()) {
        let slot = pairs.entry((r.variant, r.graph_id.clone(), r.n)).or_default();
        match r.objective {
            Formulation::OptimalSoft => slot.0 = Some(r),
            Formulation::MaximalSoft => slot.1 = Some(r),
            Formulation::Feasibility => {}
        }
    }
    let mut per_variant: BTreeMap<Variant, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for ((variant, _, n), slot) in &pairs {
        let (Some(opt), Some(max)) = *slot else { continue };
        let (max_inc, max_miss) = (opt.n_nodes, (n - 1) * opt.n_nodes);
        let entry = per_variant.entry(*variant).or_default();
        if max_miss > 0 {
            entry.0.push((max.miss_cov.unwrap() as f64 - opt.miss_cov.unwrap() as f64) / max_miss as f64);
        }
        entry.1.push((opt.inc_nodes.unwrap() as f64 - max.inc_nodes.unwrap() as f64) / max_inc as f64);
    }
    let relative = per_variant
        .into_iter()
        .map(|(variant, (miss, inc))| RelativeRow {
            variant,
            pairs: inc.len(),
            p_miss_cov: mean(miss),
            p_inc_nodes: mean(inc),
        })
        .collect();

    Aggregates { times, errors, optimality, relative }
}

pub const RESULTS_FILE: &str = "results.csv";
pub const TIMES_FILE: &str = "median_times.csv";
pub const ERRORS_FILE: &str = "mean_errors.csv";
pub const OPTIMALITY_FILE: &str = "optimal_vs_non_optimal.csv";
pub const RELATIVE_FILE: &str = "relative_errors.csv";

fn write_rows<T: Serialize>(path: PathBuf, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        // serde only emits a header alongside the first row
        w.write_record(header)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregates(dir: &Path, agg: &Aggregates) -> Result<()> {
    const KEYS: [&str; 5] = ["variant", "objective", "n", "deg_exp", "n_nodes"];
    let with = |extra: &[&'static str]| KEYS.iter().chain(extra).copied().collect::<Vec<&str>>();
    write_rows(dir.join(TIMES_FILE), &agg.times, &with(&["count", "median_wall_time_s"]))?;
    write_rows(dir.join(ERRORS_FILE), &agg.errors, &with(&["count", "mean_inc_nodes", "mean_miss_cov"]))?;
    write_rows(
        dir.join(OPTIMALITY_FILE),
        &agg.optimality,
        &[
            "variant",
            "objective",
            "deg_exp",
            "n",
            "n_nodes",
            "mean_miss_cov_non_optimal",
            "mean_miss_cov_optimal",
            "mean_inc_nodes_non_optimal",
            "mean_inc_nodes_optimal",
            "n_opt",
            "n_non_opt",
        ],
    )?;
    write_rows(dir.join(RELATIVE_FILE), &agg.relative, &["variant", "pairs", "p_miss_cov", "p_inc_nodes"])?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|rec| rec.map_err(Error::from)).collect()
}

/// Run, stream `results.csv` into `dir`, then write the aggregate CSVs.
pub fn run_experiment_to_dir(config: &ExperimentConfig, dir: &Path) -> Result<(Vec<ResultRecord>, Aggregates)> {
    config.validate()?;
    std::fs::create_dir_all(dir)?;
    let mut writer = csv::Writer::from_path(dir.join(RESULTS_FILE))?;
    let records = run_experiment(config, |rec| {
        writer.serialize(rec)?;
        writer.flush()?;
        Ok(())
    })?;
    drop(writer);
    let agg = aggregate(&records);
    write_aggregates(dir, &agg)?;
    Ok((records, agg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, objective: Formulation, status: &str, wall: f64, miss: usize, inc: usize) -> ResultRecord {
        ResultRecord {
            graph_id: id.into(),
            n_nodes: 10,
            deg_exp: 4.0,
            avg_degree: Some(4.0),
            variant: Variant::Sg1,
            n: 3,
            objective,
            status: status.into(),
            objective_value: Some(1.0),
            best_bound: Some(1.0),
            wall_time_s: Some(wall),
            miss_cov: Some(miss),
            inc_nodes: Some(inc),
        }
    }

    #[test]
    fn lower_median_of_even_count() {
        assert_eq!(lower_median(&mut [4.0, 1.0, 3.0, 2.0]), Some(2.0));
        assert_eq!(lower_median(&mut [5.0]), Some(5.0));
        assert_eq!(lower_median(&mut []), None);
    }

    #[test]
    fn seeds_are_spread() {
        let a = derive_seed(7, &[0, 1]);
        assert_ne!(a, derive_seed(7, &[1, 0]));
        assert_ne!(a, derive_seed(8, &[0, 1]));
        assert_eq!(a, derive_seed(7, &[0, 1]));
    }

    #[test]
    fn aggregation_splits_and_pairs() {
        let recs = vec![
            record("a", Formulation::OptimalSoft, "optimal", 0.5, 4, 3),
            record("a", Formulation::MaximalSoft, "optimal", 0.25, 7, 2),
            record("b", Formulation::OptimalSoft, "feasible-time-limit", 2.0, 6, 5),
            record("b", Formulation::MaximalSoft, "optimal", 1.0, 9, 4),
        ];
        let agg = aggregate(&recs);
        let opt = agg.optimality.iter().find(|r| r.objective == Formulation::OptimalSoft).unwrap();
        assert_eq!((opt.n_opt, opt.n_non_opt), (1, 1));
        assert_eq!(opt.mean_miss_cov_optimal, Some(4.0));
        assert_eq!(opt.mean_miss_cov_non_optimal, Some(6.0));
        let t = agg.times.iter().find(|r| r.objective == Formulation::OptimalSoft).unwrap();
        assert_eq!(t.median_wall_time_s, Some(0.5));
        let rel = &agg.relative[0];
        assert_eq!(rel.pairs, 2);
        assert_eq!(rel.p_miss_cov, Some((3.0 / 20.0 + 3.0 / 20.0) / 2.0));
        assert_eq!(rel.p_inc_nodes, Some((1.0 / 10.0 + 1.0 / 10.0) / 2.0));
        let mut shuffled = recs.clone();
        shuffled.reverse();
        assert_eq!(aggregate(&shuffled), agg);
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::from_json("{\"seed_rows\": []}").is_err());
        let row = r#"{"n_nodes":20,"deg_exp":4,"lambda":0.21,"r_tr":0.36}"#;
        let c = ExperimentConfig::from_json(&format!("{{\"seed_rows\":[{row}]}}")).unwrap();
        assert_eq!(c.graphs_per_row, 20);
        assert_eq!(c.partition_sizes, vec![3, 4, 5]);
        assert_eq!(c.limits.time_limit, 1200.0);
        let bad = format!("{{\"seed_rows\":[{row}],\"objectives\":[\"feasible\"]}}");
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let typo = format!("{{\"seed_rows\":[{row}],\"graphs\":3}}");
        assert!(ExperimentConfig::from_json(&typo).is_err());
    }
}
