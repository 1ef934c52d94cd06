//! Python bindings. The module is importable as `multisage`.
//!
//! Enum-valued arguments (`mode`, `activation`, `policy`) take their
//! snake_case names, e.g. `"graphsage"`. Experiment specs and results cross
//! the boundary as JSON strings.

use std::fs::File;
use std::io::{BufReader, BufWriter};

use multisage::embed::{
    self, read_checkpoint, write_checkpoint, Activation, Checkpoint, EmbeddingTable, Features,
    Mode, ModelParams, SamplerConfig, Topology, TrainConfig,
};
use multisage::eval::{self, make_split, EvalSplit, SplitConfig};
use multisage::experiments::{self, SweepSpec};
use multisage::graph::{LayerId, MultiplexGraph};
use multisage::ingest::{self, CouplingPolicy, CouplingRecord, EdgeRecord, GraphSummary};
use pyo3::exceptions::{PyIOError, PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_enum<T: DeserializeOwned>(what: &str, s: &str) -> PyResult<T> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown {what} {s:?}")))
}

fn embed_err(e: embed::EmbedError) -> PyErr {
    match e {
        embed::EmbedError::Diverged { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => value_err(e),
    }
}

/// An immutable multiplex network. Replicas are numbered layer by layer.
#[pyclass(name = "Multiplex", module = "multisage", frozen)]
struct PyMultiplex {
    g: MultiplexGraph,
}

#[pymethods]
impl PyMultiplex {
    /// Loads a layered edge list (and optional coupling file); keeps the
    /// largest connected component.
    #[staticmethod]
    #[pyo3(signature = (path, couplings=None, policy="derive_shared_label"))]
    fn load(path: &str, couplings: Option<&str>, policy: &str) -> PyResult<Self> {
        let policy: CouplingPolicy = parse_enum("coupling policy", policy)?;
        let g = ingest::load_multiplex(path.as_ref(), couplings.map(AsRef::as_ref), policy)
            .map_err(|e| match e {
                ingest::IngestError::Open(..) | ingest::IngestError::Io(_) => {
                    PyIOError::new_err(e.to_string())
                }
                _ => value_err(e),
            })?;
        Ok(Self { g })
    }

    /// Builds from `(layer, u, v)` records and optional
    /// `(layer_a, node_a, layer_b, node_b)` couplings.
    #[staticmethod]
    #[pyo3(signature = (edges, couplings=None, policy="derive_shared_label"))]
    fn from_edges(
        edges: Vec<(String, String, String)>,
        couplings: Option<Vec<(String, String, String, String)>>,
        policy: &str,
    ) -> PyResult<Self> {
        let policy: CouplingPolicy = parse_enum("coupling policy", policy)?;
        let records: Vec<EdgeRecord> = edges
            .into_iter()
            .enumerate()
            .map(|(i, (layer, u, v))| EdgeRecord {
                line: i + 1,
                layer,
                u,
                v,
            })
            .collect();
        let couplings: Option<Vec<CouplingRecord>> = couplings.map(|c| {
            c.into_iter()
                .enumerate()
                .map(|(i, (layer_a, node_a, layer_b, node_b))| CouplingRecord {
                    line: i + 1,
                    layer_a,
                    node_a,
                    layer_b,
                    node_b,
                })
                .collect()
        });
        let g = ingest::assemble_multiplex(&records, couplings.as_deref(), policy)
            .map_err(value_err)?;
        Ok(Self { g })
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.g.node_count()
    }

    #[getter]
    fn layer_count(&self) -> usize {
        self.g.layer_count()
    }

    #[getter]
    fn layer_names(&self) -> Vec<String> {
        self.g.layer_names().to_vec()
    }

    #[getter]
    fn intra_edge_count(&self) -> usize {
        self.g.intra_edge_count()
    }

    #[getter]
    fn inter_edge_count(&self) -> usize {
        self.g.inter_edge_count()
    }

    /// `(layer name, label)` of every replica, by index.
    fn replicas(&self) -> Vec<(String, String)> {
        self.g
            .replicas()
            .iter()
            .map(|r| (self.g.layer_name(r.layer).to_string(), r.label.clone()))
            .collect()
    }

    /// Index of the replica of `label` on `layer`, if present.
    fn find(&self, layer: &str, label: &str) -> Option<usize> {
        let l = self.g.layer_names().iter().position(|n| n == layer)?;
        self.g.find(LayerId(l), label)
    }

    fn intra_edges(&self) -> Vec<(usize, usize)> {
        self.g.intra_edges()
    }

    fn inter_edges(&self) -> Vec<(usize, usize)> {
        self.g.inter_edges()
    }

    fn intra_neighbors(&self, n: usize) -> PyResult<Vec<usize>> {
        self.check(n)?;
        Ok(self.g.intra_neighbors(n).to_vec())
    }

    fn inter_neighbors(&self, n: usize) -> PyResult<Vec<usize>> {
        self.check(n)?;
        Ok(self.g.inter_neighbors(n).to_vec())
    }

    /// `δ(L)` for each prefix of the layers sorted by size, as `(L, δ)`.
    fn delta(&self) -> PyResult<Vec<(usize, f64)>> {
        let series =
            eval::delta(&self.g, &eval::layer_order_by_size(&self.g)).map_err(value_err)?;
        Ok(series.points.iter().map(|p| (p.layers, p.delta)).collect())
    }

    fn largest_connected_component(&self) -> Self {
        Self {
            g: self.g.largest_connected_component(),
        }
    }

    fn __repr__(&self) -> String {
        format!("Multiplex({})", GraphSummary::of(&self.g))
    }
}

impl PyMultiplex {
    fn check(&self, n: usize) -> PyResult<()> {
        if n < self.g.node_count() {
            Ok(())
        } else {
            Err(PyIndexError::new_err(format!("replica {n} out of range")))
        }
    }
}

/// Single-layer Watts–Strogatz graph wrapped as a multiplex.
#[pyfunction]
fn watts_strogatz(n: usize, k: usize, phi: f64, seed: u64) -> PyResult<PyMultiplex> {
    let g = ingest::watts_strogatz(n, k, phi, seed).map_err(value_err)?;
    Ok(PyMultiplex {
        g: ingest::lift_to_single_layer_multiplex(&g),
    })
}

/// Largest layer of `g` with every non-adjacent pair linked with
/// probability `rho`, as a single-layer multiplex.
#[pyfunction]
fn add_random_links(g: &PyMultiplex, rho: f64, seed: u64) -> PyResult<PyMultiplex> {
    let (_, layer) = ingest::largest_layer(&g.g);
    let out = ingest::add_random_links(&layer, rho, seed).map_err(value_err)?;
    Ok(PyMultiplex {
        g: ingest::lift_to_single_layer_multiplex(&out),
    })
}

/// A held-out link-prediction split.
#[pyclass(name = "Split", module = "multisage", frozen)]
struct PySplit {
    split: EvalSplit,
}

#[pymethods]
impl PySplit {
    #[getter]
    fn seed(&self) -> u64 {
        self.split.seed
    }

    #[getter]
    fn marked_nodes(&self) -> Vec<usize> {
        self.split.marked_nodes.clone()
    }

    #[getter]
    fn test_pos_intra(&self) -> Vec<(usize, usize)> {
        self.split.test_pos_intra.clone()
    }

    #[getter]
    fn test_pos_inter(&self) -> Vec<(usize, usize)> {
        self.split.test_pos_inter.clone()
    }

    #[getter]
    fn test_neg_intra(&self) -> Vec<(usize, usize)> {
        self.split.test_neg_intra.clone()
    }

    #[getter]
    fn test_neg_inter(&self) -> Vec<(usize, usize)> {
        self.split.test_neg_inter.clone()
    }

    /// Links the model may be trained on.
    fn training_edges(&self) -> Vec<(usize, usize)> {
        self.split.training_edges()
    }

    /// The multiplex with the held-out links removed.
    fn training_graph(&self, g: &PyMultiplex) -> PyMultiplex {
        PyMultiplex {
            g: self.split.training_graph(&g.g),
        }
    }

    fn save(&self, path: &str, g: &PyMultiplex) -> PyResult<()> {
        let f = File::create(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        eval::write_split(BufWriter::new(f), &self.split, &g.g).map_err(value_err)
    }

    #[staticmethod]
    fn load(path: &str, g: &PyMultiplex) -> PyResult<Self> {
        let f = File::open(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        let split = eval::read_split(BufReader::new(f), &g.g).map_err(value_err)?;
        Ok(Self { split })
    }
}

#[pyfunction]
#[pyo3(signature = (g, seed, marked_fraction=0.2, both_endpoints_marked=false))]
fn split(
    g: &PyMultiplex,
    seed: u64,
    marked_fraction: f64,
    both_endpoints_marked: bool,
) -> PyResult<PySplit> {
    let config = SplitConfig {
        seed,
        marked_fraction,
        both_endpoints_marked,
        ..Default::default()
    };
    Ok(PySplit {
        split: make_split(&g.g, &config).map_err(value_err)?,
    })
}

/// Trained weights plus the embeddings of the graph they were trained on.
#[pyclass(name = "Model", module = "multisage", frozen)]
struct PyModel {
    params: ModelParams,
    embeddings: EmbeddingTable,
    loss_history: Vec<f64>,
}

#[pymethods]
impl PyModel {
    /// Trains on `edges` of `g` (all links when absent) with one-hot inputs.
    #[staticmethod]
    #[pyo3(signature = (
        g, edges=None, mode="multisage", hidden_dims=vec![128, 128], epochs=100,
        learning_rate=1e-3, negatives=5, activation="relu", output_activation="identity",
        normalize=true, seed=0
    ))]
    #[allow(clippy::too_many_arguments)]
    fn train(
        py: Python<'_>,
        g: &PyMultiplex,
        edges: Option<Vec<(usize, usize)>>,
        mode: &str,
        hidden_dims: Vec<usize>,
        epochs: usize,
        learning_rate: f64,
        negatives: usize,
        activation: &str,
        output_activation: &str,
        normalize: bool,
        seed: u64,
    ) -> PyResult<Self> {
        let mode: Mode = parse_enum("mode", mode)?;
        let act: Activation = parse_enum("activation", activation)?;
        let out: Activation = parse_enum("activation", output_activation)?;
        let n = g.g.node_count();
        let dims: Vec<usize> = std::iter::once(n).chain(hidden_dims).collect();
        let params = ModelParams::glorot(mode, act, &dims, seed)
            .map_err(embed_err)?
            .with_normalization(normalize)
            .with_output_activation(out);
        let edges = edges.unwrap_or_else(|| g.g.flattened().edges());
        let config = TrainConfig {
            learning_rate,
            epochs,
            seed,
            ..Default::default()
        };
        let sampler = SamplerConfig {
            q: negatives,
            seed,
            ..Default::default()
        };
        let outcome = py
            .detach(|| {
                embed::train(
                    &Topology::new(&g.g, mode),
                    &Features::OneHot(n),
                    &edges,
                    params,
                    &config,
                    &sampler,
                )
            })
            .map_err(embed_err)?;
        Ok(Self {
            params: outcome.params,
            embeddings: outcome.embeddings,
            loss_history: outcome.loss_history,
        })
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.params.mode.as_str()
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.params.dims.clone()
    }

    #[getter]
    fn loss_history(&self) -> Vec<f64> {
        self.loss_history.clone()
    }

    /// Embedding rows, one per replica.
    fn embeddings(&self) -> Vec<Vec<f64>> {
        self.embeddings
            .0
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect()
    }

    /// `z_u · z_v`.
    fn score(&self, u: usize, v: usize) -> PyResult<f64> {
        let n = self.embeddings.node_count();
        if u >= n || v >= n {
            return Err(PyIndexError::new_err("replica out of range"));
        }
        Ok(self.embeddings.score(u, v))
    }

    /// Re-embeds with the trained weights on `g` (same replica count).
    fn embed(&self, g: &PyMultiplex) -> PyResult<Self> {
        let topo = Topology::new(&g.g, self.params.mode);
        let z = embed::embed(&self.params, &topo, &Features::OneHot(g.g.node_count()))
            .map_err(embed_err)?;
        Ok(Self {
            params: self.params.clone(),
            embeddings: z,
            loss_history: self.loss_history.clone(),
        })
    }

    /// AUCs `(intra, inter)` on the test side of `split`; `None` when a side is empty.
    fn evaluate(&self, split: &PySplit) -> PyResult<(Option<f64>, Option<f64>)> {
        let e = eval::evaluate(&self.embeddings, &split.split).map_err(value_err)?;
        Ok((e.auc_intra, e.auc_inter))
    }

    fn save(&self, path: &str) -> PyResult<()> {
        let f = File::create(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        let ck = Checkpoint {
            params: self.params.clone(),
            seed: 0,
            provenance: String::new(),
        };
        write_checkpoint(BufWriter::new(f), &ck).map_err(value_err)
    }

    /// Loads weights and embeds `g` with them.
    #[staticmethod]
    fn load(path: &str, g: &PyMultiplex) -> PyResult<Self> {
        let f = File::open(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        let ck = read_checkpoint(BufReader::new(f)).map_err(value_err)?;
        let topo = Topology::new(&g.g, ck.params.mode);
        let z = embed::embed(&ck.params, &topo, &Features::OneHot(g.g.node_count()))
            .map_err(embed_err)?;
        Ok(Self {
            params: ck.params,
            embeddings: z,
            loss_history: Vec::new(),
        })
    }
}

/// Mann–Whitney AUC, ties counted one half.
#[pyfunction]
fn auc(pos: Vec<f64>, neg: Vec<f64>) -> PyResult<f64> {
    eval::mann_whitney_auc(&pos, &neg).map_err(value_err)
}

/// ROC curve points `(fpr, tpr)` and its area.
#[pyfunction]
fn roc(pos: Vec<f64>, neg: Vec<f64>) -> PyResult<(Vec<(f64, f64)>, f64)> {
    let c = eval::roc_auc(&pos, &neg).map_err(value_err)?;
    Ok((c.points, c.auc))
}

/// Runs a sweep given as JSON (`{"sweep": {"kind": ...}, "settings": {...}}`)
/// and returns the result as JSON.
#[pyfunction]
#[pyo3(signature = (spec, graph=None, name="dataset"))]
fn run_sweep(
    py: Python<'_>,
    spec: &str,
    graph: Option<&PyMultiplex>,
    name: &str,
) -> PyResult<String> {
    let spec: SweepSpec = serde_json::from_str(spec).map_err(value_err)?;
    let result = py
        .detach(|| experiments::run_sweep(&spec, graph.map(|g| (name, &g.g))))
        .map_err(|e| match e {
            experiments::ExperimentError::Embed(e) => embed_err(e),
            e => value_err(e),
        })?;
    serde_json::to_string(&result).map_err(value_err)
}

#[pymodule]
#[pyo3(name = "multisage")]
fn multisage_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMultiplex>()?;
    m.add_class::<PySplit>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(watts_strogatz, m)?)?;
    m.add_function(wrap_pyfunction!(add_random_links, m)?)?;
    m.add_function(wrap_pyfunction!(split, m)?)?;
    m.add_function(wrap_pyfunction!(auc, m)?)?;
    m.add_function(wrap_pyfunction!(roc, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
