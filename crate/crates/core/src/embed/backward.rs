//! Reverse-mode gradients of the sampled loss with respect to every weight
//! matrix, negatives held fixed.
//!
//! With `G^k = ∂J/∂pre^k` (node-major, `N × d_k`) and `M_c^k` the channel
//! neighbor means of the depth input `H^{k-1}`:
//!
//! ```text
//! ∂J/∂W_c^k   = (G^k)ᵀ M_c^k
//! ∂J/∂S^k     = (G^k)ᵀ H^{k-1}
//! ∂J/∂H^{k-1} = G^k S^k + Σ_c Meanᵀ_c (G^k W_c^k)
//! G^{k-1}     = ∂J/∂H^{k-1} ⊙ θ'(pre^{k-1})
//! ```
//!
//! Under one-hot input `H^0 = I`, so `∂J/∂S^1 = (G^1)ᵀ` and
//! `∂J/∂W_c^1 = (Meanᵀ_c G^1)ᵀ`. Output normalization `z = h / ‖h‖` adds
//! `∂J/∂h = (∂J/∂z − z (z·∂J/∂z)) / ‖h‖`; zero rows get a zero gradient.

use ndarray::{Array2, Axis, Zip};

use super::forward::neighbor_mean_transpose;
use super::loss::loss_and_output_grad;
use super::{DepthParams, EmbedError, Features, ForwardCache, ModelParams, Negatives, Topology};
use crate::graph::Csr;

/// Gradients shaped like [`ModelParams::depths`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub depths: Vec<DepthParams>,
}

impl Gradients {
    /// `∂J/∂W_V^k` in multisage mode, `None` in graphsage mode.
    pub fn w_v(&self, k: usize) -> Option<&Array2<f64>> {
        self.depths[k - 1].neighbor.get(1)
    }

    pub fn scale(&mut self, factor: f64) {
        for d in &mut self.depths {
            for m in d.matrices_mut() {
                *m *= factor;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.depths
            .iter()
            .flat_map(|d| d.matrices())
            .flat_map(|m| m.iter())
            .fold(0.0f64, |a, &b| a.max(b.abs()))
    }
}

fn check_cache(
    params: &ModelParams,
    topo: &Topology,
    cache: &ForwardCache,
) -> Result<(), EmbedError> {
    if cache.node_count != topo.node_count() {
        return Err(EmbedError::CacheMismatch(format!(
            "cache has {} replicas, graph has {}",
            cache.node_count,
            topo.node_count()
        )));
    }
    if cache.dims != params.dims {
        return Err(EmbedError::CacheMismatch(format!(
            "cache dims {:?}, model dims {:?}",
            cache.dims, params.dims
        )));
    }
    let nnz: Vec<usize> = topo.channels().iter().map(Csr::nnz).collect();
    if cache.channel_nnz != nnz {
        return Err(EmbedError::CacheMismatch(
            "neighborhood structure differs".into(),
        ));
    }
    Ok(())
}

/// Back-propagates `∂J/∂z` through the cached forward pass.
pub fn gradients(
    params: &ModelParams,
    topo: &Topology,
    features: &Features,
    cache: &ForwardCache,
    output_grad: &Array2<f64>,
) -> Result<Gradients, EmbedError> {
    check_cache(params, topo, cache)?;
    let k_max = params.depth();

    let mut grad_h = output_grad.clone();
    if params.normalize_output {
        let z = &cache.output.0;
        for ((mut g, z_row), &r) in grad_h
            .axis_iter_mut(Axis(0))
            .zip(z.axis_iter(Axis(0)))
            .zip(&cache.norms)
        {
            if r > 0.0 {
                let proj = z_row.dot(&g);
                g.scaled_add(-proj, &z_row);
                g /= r;
            } else {
                g.fill(0.0);
            }
        }
    }

    let mut depths: Vec<Option<DepthParams>> = vec![None; k_max];
    for k in (0..k_max).rev() {
        let layer = &params.depths[k];
        let act = params.activation_at(k + 1);
        let mut g = grad_h;
        Zip::from(&mut g)
            .and(&cache.pre[k])
            .and(&cache.hidden[k])
            .for_each(|g, &x, &y| *g *= act.derivative(x, y));

        let one_hot_input = k == 0 && matches!(features, Features::OneHot(_));
        let grads = if one_hot_input {
            let neighbor = (0..layer.neighbor.len())
                .map(|c| {
                    neighbor_mean_transpose(cache.adjacency(topo, k, c), &g)
                        .reversed_axes()
                        .as_standard_layout()
                        .into_owned()
                })
                .collect();
            DepthParams {
                neighbor,
                self_weight: g.t().as_standard_layout().into_owned(),
            }
        } else {
            let input = match (k, features) {
                (0, Features::Dense(x)) => x,
                _ => &cache.hidden[k - 1],
            };
            DepthParams {
                neighbor: cache.means[k].iter().map(|m| g.t().dot(m)).collect(),
                self_weight: g.t().dot(input),
            }
        };
        depths[k] = Some(grads);

        grad_h = if k > 0 {
            let mut next = g.dot(&layer.self_weight);
            for (c, w) in layer.neighbor.iter().enumerate() {
                next += &neighbor_mean_transpose(cache.adjacency(topo, k, c), &g.dot(w));
            }
            next
        } else {
            Array2::zeros((0, 0))
        };
    }
    Ok(Gradients {
        depths: depths.into_iter().map(Option::unwrap).collect(),
    })
}

/// Loss of the cached embeddings on `edges` with frozen `negatives`, and its
/// gradient with respect to all weights.
pub fn loss_and_gradients(
    params: &ModelParams,
    topo: &Topology,
    features: &Features,
    edges: &[(usize, usize)],
    negatives: &Negatives,
    cache: &ForwardCache,
) -> Result<(f64, Gradients), EmbedError> {
    let (loss, dz) = loss_and_output_grad(&cache.output, edges, negatives);
    let grads = gradients(params, topo, features, cache, &dz)?;
    Ok((loss, grads))
}
