//! Experiment drivers: dataset benchmarks, layer sweeps with the `δ(L)`
//! overlay, and the Erdős–Rényi and Watts–Strogatz randomness sweeps.
//!
//! Every run `r` of a sweep draws its split, initialization, edge order and
//! negatives from seeds derived from the master seed and `r` only, so the two
//! modes see identical splits and any row can be replayed on its own.

mod output;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::embed::{
    train, Activation, EmbedError, EmbeddingTable, Features, Mode, ModelParams, SamplerConfig,
    Topology, TrainConfig,
};
use crate::eval::{
    aggregate_runs, delta, evaluate, layer_order_by_size, make_split, EvalError, EvalSplit,
    Evaluation, SplitConfig, Summary,
};
use crate::graph::{Graph, GraphError, MultiplexGraph};
use crate::ingest::{
    add_random_links, largest_layer, lift_to_single_layer_multiplex, watts_strogatz, IngestError,
};
use crate::seed::derive_seed;

pub use output::{emit_results, read_results, OutputFormat, CSV_COLUMNS};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed result file: {0}")]
    Format(String),
}

/// Architecture of the model trained in every run. The input dimension is the
/// replica count (one-hot features).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSettings {
    /// `[d_1, …, d_K]`.
    pub hidden_dims: Vec<usize>,
    pub activation: Activation,
    /// Activation of the last depth.
    pub output_activation: Activation,
    pub normalize_output: bool,
}

impl Default for ModelSettings {
    fn default() -> Self {
        Self {
            hidden_dims: vec![128, 128],
            activation: Activation::Relu,
            output_activation: Activation::Identity,
            normalize_output: true,
        }
    }
}

/// Everything a run needs besides the graph. The seeds inside `train`,
/// `sampler` and `split` are ignored; they are derived from `master_seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSettings {
    pub model: ModelSettings,
    pub train: TrainConfig,
    pub sampler: SamplerConfig,
    pub split: SplitConfig,
    pub runs: usize,
    pub modes: Vec<Mode>,
    pub master_seed: u64,
    /// Worker threads for independent runs; all cores when absent.
    pub threads: Option<usize>,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            model: ModelSettings::default(),
            train: TrainConfig::default(),
            sampler: SamplerConfig::default(),
            split: SplitConfig::default(),
            runs: 20,
            modes: vec![Mode::Multisage, Mode::Graphsage],
            master_seed: 0,
            threads: None,
        }
    }
}

impl RunSettings {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.runs == 0 {
            return Err(ExperimentError::Config("runs must be at least 1".into()));
        }
        if self.modes.is_empty() {
            return Err(ExperimentError::Config("no modes selected".into()));
        }
        if self.model.hidden_dims.is_empty() || self.model.hidden_dims.contains(&0) {
            return Err(ExperimentError::Config(
                "hidden dims must be nonempty and positive".into(),
            ));
        }
        Ok(())
    }

    pub fn split_seed(&self, run: usize) -> u64 {
        derive_seed(self.master_seed, "split", run as u64)
    }
}

/// Base graph of an ER sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum ErBase {
    /// Largest layer of the dataset.
    LargestLayer,
    /// A Watts–Strogatz graph, for runs without a dataset.
    WattsStrogatz {
        n: usize,
        k: usize,
        phi: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepKind {
    Benchmark,
    LayerSweep,
    ErSweep {
        base: ErBase,
        #[serde(default = "default_rho_grid")]
        rho_grid: Vec<f64>,
    },
    WsSweep {
        #[serde(default = "default_ws_n")]
        n: usize,
        #[serde(default = "default_ws_k")]
        k: usize,
        #[serde(default = "default_phi_grid")]
        phi_grid: Vec<f64>,
    },
}

impl SweepKind {
    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::Benchmark => "benchmark",
            SweepKind::LayerSweep => "layer_sweep",
            SweepKind::ErSweep { .. } => "er_sweep",
            SweepKind::WsSweep { .. } => "ws_sweep",
        }
    }
}

fn default_ws_n() -> usize {
    10_000
}

fn default_ws_k() -> usize {
    4
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

/// `{0}` and ten log-spaced densities in `[1e-5, 1e-1]`.
pub fn default_rho_grid() -> Vec<f64> {
    std::iter::once(0.0)
        .chain(log_grid(1e-5, 1e-1, 10))
        .collect()
}

/// `{0}` and ten log-spaced rewiring probabilities in `[1e-4, 1]`.
pub fn default_phi_grid() -> Vec<f64> {
    std::iter::once(0.0)
        .chain(log_grid(1e-4, 1.0, 10))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub sweep: SweepKind,
    #[serde(default)]
    pub settings: RunSettings,
}

/// One `(coordinate, mode)` aggregate over all runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub coordinate: String,
    pub mode: Mode,
    /// Absent when some run had no intra-layer test pairs.
    pub auc_intra: Option<Summary>,
    pub auc_inter: Option<Summary>,
    pub delta: Option<f64>,
    pub runs: usize,
    pub seed: u64,
    /// Summed wall time of the row's runs.
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the canonical JSON of the sweep spec.
    pub config_hash: String,
    pub version: String,
    pub dataset: Option<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: SweepSpec,
    pub provenance: Provenance,
    pub rows: Vec<ResultRow>,
}

impl ExperimentResult {
    pub fn row(&self, coordinate: &str, mode: Mode) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.coordinate == coordinate && r.mode == mode)
    }
}

pub fn config_hash(spec: &SweepSpec) -> String {
    let json = serde_json::to_vec(spec).expect("sweep spec serializes");
    Sha256::digest(&json)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Outcome of training and evaluating one model on one split.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub evaluation: Evaluation,
    pub loss_history: Vec<f64>,
    pub split_seed: u64,
    pub runtime_s: f64,
}

/// A trained model with its held-out evaluation.
#[derive(Debug, Clone)]
pub struct TrainedRun {
    pub params: ModelParams,
    pub embeddings: EmbeddingTable,
    pub loss_history: Vec<f64>,
    pub evaluation: Evaluation,
}

/// The split of `g` used by run `run`.
pub fn split_for_run(
    g: &MultiplexGraph,
    settings: &RunSettings,
    run: usize,
) -> Result<EvalSplit, ExperimentError> {
    let split_config = SplitConfig {
        seed: settings.split_seed(run),
        ..settings.split.clone()
    };
    Ok(make_split(g, &split_config)?)
}

/// Trains on the links of `g` outside the test side of `split` and evaluates
/// on the held-out pairs. Initialization, batching and negatives are seeded
/// from `run`.
pub fn train_on_split(
    g: &MultiplexGraph,
    split: &EvalSplit,
    mode: Mode,
    settings: &RunSettings,
    run: usize,
) -> Result<TrainedRun, ExperimentError> {
    let seed = |stream: &str| derive_seed(settings.master_seed, stream, run as u64);
    let training_graph = split.training_graph(g);
    let topo = Topology::new(&training_graph, mode);
    let n = g.node_count();
    let dims: Vec<usize> = std::iter::once(n)
        .chain(settings.model.hidden_dims.iter().copied())
        .collect();
    let params = ModelParams::glorot(mode, settings.model.activation, &dims, seed("init"))?
        .with_normalization(settings.model.normalize_output)
        .with_output_activation(settings.model.output_activation);
    let train_config = TrainConfig {
        seed: seed("train"),
        ..settings.train.clone()
    };
    let sampler = SamplerConfig {
        seed: seed("negatives"),
        ..settings.sampler.clone()
    };
    let outcome = train(
        &topo,
        &Features::OneHot(n),
        &split.training_edges(),
        params,
        &train_config,
        &sampler,
    )?;
    let evaluation = evaluate(&outcome.embeddings, split)?;
    Ok(TrainedRun {
        params: outcome.params,
        embeddings: outcome.embeddings,
        loss_history: outcome.loss_history,
        evaluation,
    })
}

/// Splits `g` with the run's seed, trains on the remaining links and
/// evaluates on the held-out pairs.
pub fn run_single(
    g: &MultiplexGraph,
    mode: Mode,
    settings: &RunSettings,
    run: usize,
) -> Result<RunOutcome, ExperimentError> {
    let start = Instant::now();
    let split = split_for_run(g, settings, run)?;
    let trained = train_on_split(g, &split, mode, settings, run)?;
    let runtime_s = start.elapsed().as_secs_f64();
    let evaluation = trained.evaluation;
    log::info!(
        "{mode} run {run}: intra {:?}, inter {:?} in {runtime_s:.1}s",
        evaluation.auc_intra,
        evaluation.auc_inter
    );
    Ok(RunOutcome {
        evaluation,
        loss_history: trained.loss_history,
        split_seed: split.seed,
        runtime_s,
    })
}

struct Point {
    coordinate: String,
    graph: MultiplexGraph,
    delta: Option<f64>,
}

fn summarize(values: Vec<Option<f64>>) -> Option<Summary> {
    let present: Option<Vec<f64>> = values.into_iter().collect();
    present.and_then(|v| aggregate_runs(&v).ok())
}

/// Runs every `(point, mode, run)` job, in parallel when allowed, and
/// aggregates in grid order.
fn run_grid(
    points: &[Point],
    modes: &[Mode],
    settings: &RunSettings,
) -> Result<Vec<ResultRow>, ExperimentError> {
    let jobs: Vec<(usize, Mode, usize)> = (0..points.len())
        .flat_map(|p| {
            modes
                .iter()
                .flat_map(move |&m| (0..settings.runs).map(move |r| (p, m, r)))
        })
        .collect();
    let work = || -> Vec<Result<RunOutcome, ExperimentError>> {
        jobs.par_iter()
            .map(|&(p, m, r)| run_single(&points[p].graph, m, settings, r))
            .collect()
    };
    let results = match settings.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| ExperimentError::Config(e.to_string()))?
            .install(work),
        None => work(),
    };
    let mut results = results.into_iter();
    let mut rows = Vec::new();
    for point in points {
        for &mode in modes {
            let outcomes = (0..settings.runs)
                .map(|_| results.next().expect("one result per job"))
                .collect::<Result<Vec<_>, _>>()?;
            let intra = outcomes.iter().map(|o| o.evaluation.auc_intra).collect();
            let inter = outcomes.iter().map(|o| o.evaluation.auc_inter).collect();
            rows.push(ResultRow {
                coordinate: point.coordinate.clone(),
                mode,
                auc_intra: summarize(intra),
                auc_inter: summarize(inter),
                delta: point.delta,
                runs: settings.runs,
                seed: settings.master_seed,
                runtime_s: outcomes.iter().map(|o| o.runtime_s).sum(),
            });
        }
    }
    Ok(rows)
}

fn finish(
    kind: SweepKind,
    settings: &RunSettings,
    dataset: Option<&str>,
    rows: Vec<ResultRow>,
) -> ExperimentResult {
    let spec = SweepSpec {
        sweep: kind,
        settings: settings.clone(),
    };
    let mut notes = Vec::new();
    if let crate::eval::NegCap::Multiple { factor } = settings.split.neg_cap {
        notes.push(format!(
            "test negatives capped at {factor}x the matching positive count by uniform subsampling"
        ));
    }
    ExperimentResult {
        provenance: Provenance {
            config_hash: config_hash(&spec),
            version: env!("CARGO_PKG_VERSION").to_string(),
            dataset: dataset.map(str::to_string),
            notes,
        },
        spec,
        rows,
    }
}

/// One row per mode, each aggregated over `settings.runs` splits.
pub fn run_benchmark(
    g: &MultiplexGraph,
    dataset: &str,
    settings: &RunSettings,
) -> Result<ExperimentResult, ExperimentError> {
    settings.validate()?;
    let points = [Point {
        coordinate: dataset.to_string(),
        graph: g.clone(),
        delta: None,
    }];
    let rows = run_grid(&points, &settings.modes, settings)?;
    Ok(finish(SweepKind::Benchmark, settings, Some(dataset), rows))
}

/// Prefixes of the size-sorted layer order, from the two largest layers to
/// the full multiplex. Coordinates are the prefix lengths.
pub fn run_layer_sweep(
    g: &MultiplexGraph,
    dataset: &str,
    settings: &RunSettings,
) -> Result<ExperimentResult, ExperimentError> {
    settings.validate()?;
    if g.layer_count() < 2 {
        return Err(ExperimentError::Config(
            "a layer sweep needs at least two layers".into(),
        ));
    }
    let order = layer_order_by_size(g);
    let series = delta(g, &order)?;
    let points = series
        .points
        .iter()
        .map(|p| {
            Ok(Point {
                coordinate: p.layers.to_string(),
                graph: g.layer_subnetwork(&order[..p.layers])?,
                delta: Some(p.delta),
            })
        })
        .collect::<Result<Vec<_>, GraphError>>()?;
    let rows = run_grid(&points, &settings.modes, settings)?;
    Ok(finish(SweepKind::LayerSweep, settings, Some(dataset), rows))
}

fn check_grid(grid: &[f64], name: &str) -> Result<(), ExperimentError> {
    if grid.is_empty() || grid.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(ExperimentError::Config(format!(
            "{name} grid must be nonempty values in [0, 1]"
        )));
    }
    Ok(())
}

fn graph_seed(settings: &RunSettings, point: usize) -> u64 {
    derive_seed(settings.master_seed, "graph", point as u64)
}

/// Graphsage on `base ∪ ER(ρ)` for each `ρ`. Coordinates are the `ρ` values.
pub fn run_er_sweep(
    base: &Graph,
    rho_grid: &[f64],
    settings: &RunSettings,
    er_base: ErBase,
    dataset: Option<&str>,
) -> Result<ExperimentResult, ExperimentError> {
    settings.validate()?;
    check_grid(rho_grid, "rho")?;
    let points = rho_grid
        .iter()
        .enumerate()
        .map(|(i, &rho)| {
            let g = add_random_links(base, rho, graph_seed(settings, i))?;
            Ok(Point {
                coordinate: rho.to_string(),
                graph: lift_to_single_layer_multiplex(&g),
                delta: None,
            })
        })
        .collect::<Result<Vec<_>, IngestError>>()?;
    let rows = run_grid(&points, &[Mode::Graphsage], settings)?;
    let kind = SweepKind::ErSweep {
        base: er_base,
        rho_grid: rho_grid.to_vec(),
    };
    Ok(finish(kind, settings, dataset, rows))
}

/// Graphsage on Watts–Strogatz graphs for each rewiring probability `φ`.
pub fn run_ws_sweep(
    n: usize,
    k: usize,
    phi_grid: &[f64],
    settings: &RunSettings,
) -> Result<ExperimentResult, ExperimentError> {
    settings.validate()?;
    check_grid(phi_grid, "phi")?;
    let points = phi_grid
        .iter()
        .enumerate()
        .map(|(i, &phi)| {
            let g = watts_strogatz(n, k, phi, graph_seed(settings, i))?;
            Ok(Point {
                coordinate: phi.to_string(),
                graph: lift_to_single_layer_multiplex(&g),
                delta: None,
            })
        })
        .collect::<Result<Vec<_>, IngestError>>()?;
    let rows = run_grid(&points, &[Mode::Graphsage], settings)?;
    let kind = SweepKind::WsSweep {
        n,
        k,
        phi_grid: phi_grid.to_vec(),
    };
    Ok(finish(kind, settings, None, rows))
}

/// Dispatches on the sweep kind. Benchmarks, layer sweeps and ER sweeps on
/// the largest layer need `dataset`.
pub fn run_sweep(
    spec: &SweepSpec,
    dataset: Option<(&str, &MultiplexGraph)>,
) -> Result<ExperimentResult, ExperimentError> {
    let need = || {
        dataset.ok_or_else(|| {
            ExperimentError::Config(format!("{} needs a dataset", spec.sweep.name()))
        })
    };
    let s = &spec.settings;
    match &spec.sweep {
        SweepKind::Benchmark => {
            let (name, g) = need()?;
            run_benchmark(g, name, s)
        }
        SweepKind::LayerSweep => {
            let (name, g) = need()?;
            run_layer_sweep(g, name, s)
        }
        SweepKind::ErSweep { base, rho_grid } => match base {
            ErBase::LargestLayer => {
                let (name, g) = need()?;
                let (_, layer) = largest_layer(g);
                run_er_sweep(&layer, rho_grid, s, base.clone(), Some(name))
            }
            &ErBase::WattsStrogatz { n, k, phi, seed } => {
                let g = watts_strogatz(n, k, phi, seed)?;
                run_er_sweep(&g, rho_grid, s, base.clone(), None)
            }
        },
        SweepKind::WsSweep { n, k, phi_grid } => run_ws_sweep(*n, *k, phi_grid, s),
    }
}
