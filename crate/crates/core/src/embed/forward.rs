//! Forward pass.
//!
//! Representations are kept node-major (`N × d_k`), so one depth reads
//! `pre = Σ_c mean_c(H) · W_cᵀ + H · Sᵀ`. With one-hot inputs `H = I` and the
//! first depth reduces to gathering columns of the weight matrices:
//! `pre = Σ_c mean_c(W_cᵀ) + Sᵀ`.

use ndarray::{Array2, Axis};
use rand::seq::index;

use super::{EmbedError, EmbeddingTable, Features, ModelParams, Topology};
use crate::graph::Csr;
use crate::seed::Rng;

/// Everything the backward pass needs from one forward evaluation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub(crate) node_count: usize,
    pub(crate) dims: Vec<usize>,
    pub(crate) channel_nnz: Vec<usize>,
    /// Per-depth sampled neighborhoods, absent when full neighborhoods are used.
    pub(crate) sampled: Option<Vec<Vec<Csr>>>,
    /// Per depth, per channel neighbor means of the depth input. Empty at
    /// depth 1 under one-hot features.
    pub(crate) means: Vec<Vec<Array2<f64>>>,
    pub(crate) pre: Vec<Array2<f64>>,
    /// `h^1 … h^K`.
    pub(crate) hidden: Vec<Array2<f64>>,
    pub(crate) norms: Vec<f64>,
    pub(crate) output: EmbeddingTable,
}

impl ForwardCache {
    pub fn embeddings(&self) -> &EmbeddingTable {
        &self.output
    }

    pub fn into_embeddings(self) -> EmbeddingTable {
        self.output
    }

    /// `h_n^k` for `k = 1..=K`.
    pub fn hidden(&self, k: usize) -> &Array2<f64> {
        &self.hidden[k - 1]
    }

    /// Pre-activations of depth `k = 1..=K`.
    pub fn pre_activation(&self, k: usize) -> &Array2<f64> {
        &self.pre[k - 1]
    }

    pub(crate) fn adjacency<'a>(
        &'a self,
        topo: &'a Topology,
        depth: usize,
        channel: usize,
    ) -> &'a Csr {
        match &self.sampled {
            Some(s) => &s[depth][channel],
            None => &topo.channels()[channel],
        }
    }
}

/// Row-wise neighbor mean: `out[n] = Σ_{m ∈ adj(n)} h[m] / |adj(n)|`, zero for
/// empty neighborhoods.
pub(crate) fn neighbor_mean(adj: &Csr, h: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros((adj.len(), h.ncols()));
    for (n, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
        let nb = adj.neighbors(n);
        if nb.is_empty() {
            continue;
        }
        for &m in nb {
            row += &h.row(m);
        }
        row /= nb.len() as f64;
    }
    out
}

/// Transpose of [`neighbor_mean`]: `out[m] += g[n] / |adj(n)|` for `m ∈ adj(n)`.
pub(crate) fn neighbor_mean_transpose(adj: &Csr, g: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros((adj.len(), g.ncols()));
    for n in 0..adj.len() {
        let nb = adj.neighbors(n);
        if nb.is_empty() {
            continue;
        }
        let scaled = &g.row(n) / nb.len() as f64;
        for &m in nb {
            let mut row = out.row_mut(m);
            row += &scaled;
        }
    }
    out
}

/// Draws at most `sizes[k]` neighbors per replica, channel and depth, without
/// replacement. Neighborhoods no larger than the budget are kept whole.
pub fn sample_neighborhoods(topo: &Topology, sizes: &[usize], rng: &mut Rng) -> Vec<Vec<Csr>> {
    sizes
        .iter()
        .map(|&budget| {
            topo.channels()
                .iter()
                .map(|adj| {
                    let lists: Vec<Vec<usize>> = (0..adj.len())
                        .map(|n| {
                            let nb = adj.neighbors(n);
                            if nb.len() <= budget {
                                nb.to_vec()
                            } else {
                                let mut picked: Vec<usize> = index::sample(rng, nb.len(), budget)
                                    .into_iter()
                                    .map(|i| nb[i])
                                    .collect();
                                picked.sort_unstable();
                                picked
                            }
                        })
                        .collect();
                    Csr::from_lists_unsorted(&lists)
                })
                .collect()
        })
        .collect()
}

/// Runs the aggregation for all replicas. `neighbor_samples` supplies
/// per-depth sampled neighborhoods (see [`sample_neighborhoods`]); `None`
/// aggregates over full neighborhoods.
pub fn forward(
    params: &ModelParams,
    topo: &Topology,
    features: &Features,
    neighbor_samples: Option<Vec<Vec<Csr>>>,
) -> Result<ForwardCache, EmbedError> {
    params.validate()?;
    let n = topo.node_count();
    if params.mode != topo.mode() {
        return Err(EmbedError::Dimension(format!(
            "model is {} but topology was built for {}",
            params.mode,
            topo.mode()
        )));
    }
    if features.node_count() != n {
        return Err(EmbedError::Dimension(format!(
            "{} feature rows for {} replicas",
            features.node_count(),
            n
        )));
    }
    if features.dim() != params.dims[0] {
        return Err(EmbedError::Dimension(format!(
            "feature dimension {} but d_0 = {}",
            features.dim(),
            params.dims[0]
        )));
    }
    if let Some(s) = &neighbor_samples {
        if s.len() != params.depth() || s.iter().any(|d| d.len() != topo.channels().len()) {
            return Err(EmbedError::Dimension(
                "neighbor samples do not match depth and channel count".into(),
            ));
        }
    }

    let mut cache = ForwardCache {
        node_count: n,
        dims: params.dims.clone(),
        channel_nnz: topo.channels().iter().map(Csr::nnz).collect(),
        sampled: neighbor_samples,
        means: Vec::with_capacity(params.depth()),
        pre: Vec::with_capacity(params.depth()),
        hidden: Vec::with_capacity(params.depth()),
        norms: Vec::new(),
        output: EmbeddingTable(Array2::zeros((0, 0))),
    };

    for (k, layer) in params.depths.iter().enumerate() {
        let mut means = Vec::new();
        let pre = match (k, features) {
            (0, Features::OneHot(_)) => {
                let mut pre = layer.self_weight.t().to_owned();
                for (c, w) in layer.neighbor.iter().enumerate() {
                    let wt = w.t().as_standard_layout().into_owned();
                    pre += &neighbor_mean(cache.adjacency(topo, k, c), &wt);
                }
                pre
            }
            _ => {
                let input = match (k, features) {
                    (0, Features::Dense(x)) => x,
                    _ => &cache.hidden[k - 1],
                };
                let mut pre = input.dot(&layer.self_weight.t());
                for (c, w) in layer.neighbor.iter().enumerate() {
                    let mean = neighbor_mean(cache.adjacency(topo, k, c), input);
                    pre += &mean.dot(&w.t());
                    means.push(mean);
                }
                pre
            }
        };
        let act = params.activation_at(k + 1);
        let h = pre.mapv(|x| act.apply(x));
        cache.means.push(means);
        cache.pre.push(pre);
        cache.hidden.push(h);
    }

    let mut z = cache.hidden.last().unwrap().clone();
    if params.normalize_output {
        cache.norms = z
            .axis_iter_mut(Axis(0))
            .map(|mut row| {
                let r = row.dot(&row).sqrt();
                if r > 0.0 {
                    row /= r;
                }
                r
            })
            .collect();
    }
    cache.output = EmbeddingTable(z);
    Ok(cache)
}

/// Full-neighborhood embeddings, no cache retained.
pub fn embed(
    params: &ModelParams,
    topo: &Topology,
    features: &Features,
) -> Result<EmbeddingTable, EmbedError> {
    forward(params, topo, features, None).map(ForwardCache::into_embeddings)
}
