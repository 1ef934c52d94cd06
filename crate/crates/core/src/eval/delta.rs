use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::graph::{LayerId, MultiplexGraph};

/// `δ(L)` for one prefix of the size-sorted layer order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaPoint {
    pub layers: usize,
    pub delta: f64,
    /// `m_L`, inter-layer links among the first `L` layers.
    pub inter_edges: usize,
    /// `N_1 … N_L`.
    pub layer_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSeries {
    pub order: Vec<LayerId>,
    /// One point per `L = 2 … len(order)`.
    pub points: Vec<DeltaPoint>,
}

/// Layers by replica count, largest first; equal sizes keep index order.
pub fn layer_order_by_size(g: &MultiplexGraph) -> Vec<LayerId> {
    let sizes = g.layer_sizes();
    let mut order: Vec<LayerId> = g.layer_ids().collect();
    order.sort_by(|a, b| sizes[b.0].cmp(&sizes[a.0]).then(a.cmp(b)));
    order
}

/// `1 − m / Σ_{l=2}^{L} (l−1) N_l`. With no room for inter-layer links the
/// value is 1.
pub fn delta_value(inter_edges: usize, sizes: &[usize]) -> f64 {
    let capacity: usize = sizes.iter().enumerate().skip(1).map(|(i, &n)| i * n).sum();
    if capacity == 0 {
        1.0
    } else {
        1.0 - inter_edges as f64 / capacity as f64
    }
}

pub fn delta(g: &MultiplexGraph, order: &[LayerId]) -> Result<DeltaSeries, EvalError> {
    if order.len() < 2 {
        return Err(EvalError::LayerOrder(
            "at least two layers are needed".into(),
        ));
    }
    let sizes = g.layer_sizes();
    let mut rank = vec![usize::MAX; g.layer_count()];
    for (i, l) in order.iter().enumerate() {
        if l.0 >= g.layer_count() || rank[l.0] != usize::MAX {
            return Err(EvalError::LayerOrder(format!(
                "layer {} repeated or unknown",
                l.0
            )));
        }
        rank[l.0] = i;
    }
    if order.windows(2).any(|w| sizes[w[0].0] < sizes[w[1].0]) {
        return Err(EvalError::LayerOrder(
            "layers must be sorted by size, largest first".into(),
        ));
    }
    // an inter edge joins prefix L once both of its layers are among the first L
    let mut joins_at = vec![0usize; order.len()];
    for (u, v) in g.inter_edges() {
        let (a, b) = (rank[g.layer_of(u).0], rank[g.layer_of(v).0]);
        if a != usize::MAX && b != usize::MAX {
            joins_at[a.max(b)] += 1;
        }
    }
    let ordered_sizes: Vec<usize> = order.iter().map(|l| sizes[l.0]).collect();
    let mut m = joins_at[0];
    let points = (1..order.len())
        .map(|i| {
            m += joins_at[i];
            let prefix = &ordered_sizes[..=i];
            DeltaPoint {
                layers: i + 1,
                delta: delta_value(m, prefix),
                inter_edges: m,
                layer_sizes: prefix.to_vec(),
            }
        })
        .collect();
    Ok(DeltaSeries {
        order: order.to_vec(),
        points,
    })
}
