use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::graph::{Graph, LayerId, MultiplexGraph};
use crate::seed;

/// A synthetic single-layer network family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticSpec {
    /// Union of a base graph with an ER graph of connection probability `rho`.
    ErUnion { rho: f64, seed: u64 },
    /// Watts–Strogatz ring lattice of `n` nodes, `k` neighbors, rewiring `phi`.
    Ws {
        n: usize,
        k: usize,
        phi: f64,
        seed: u64,
    },
}

fn check_probability(name: &'static str, p: f64) -> Result<(), IngestError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(IngestError::InvalidParameter(format!(
            "{name} = {p} is outside [0, 1]"
        )))
    }
}

/// Union of `g` with an Erdős–Rényi sample of connection probability `rho`
/// on the same node set. Every node pair is drawn independently; pairs that
/// are already edges stay edges.
pub fn add_random_links(g: &Graph, rho: f64, seed: u64) -> Result<Graph, IngestError> {
    check_probability("rho", rho)?;
    let n = g.node_count();
    let mut edges = g.edges();
    if rho == 0.0 || n < 2 {
        return Ok(g.clone());
    }
    let total = n * (n - 1) / 2;
    if rho >= 1.0 {
        edges.clear();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        return Ok(Graph::from_edges_dedup(n, &edges));
    }
    // geometric skipping over the linear index of pairs (u < v)
    let mut rng = seed::rng(seed);
    let log_q = (1.0 - rho).ln();
    let mut pos: usize = 0;
    let mut u = 0usize;
    let mut row_start = 0usize; // linear index of (u, u+1)
    loop {
        let r: f64 = rng.random();
        let skip = ((1.0 - r).ln() / log_q).floor();
        if !skip.is_finite() || skip >= (total - pos) as f64 {
            break;
        }
        pos += skip as usize;
        if pos >= total {
            break;
        }
        while pos >= row_start + (n - 1 - u) {
            row_start += n - 1 - u;
            u += 1;
        }
        let v = u + 1 + (pos - row_start);
        edges.push((u, v));
        pos += 1;
        if pos >= total {
            break;
        }
    }
    Ok(Graph::from_edges_dedup(n, &edges))
}

/// Watts–Strogatz small world. Each clockwise lattice edge `(i, i + j)`,
/// `j = 1..=k/2`, has its far endpoint rewired with probability `phi` to a
/// uniformly chosen node that is neither `i` nor already adjacent to `i`.
/// The edge count stays `n k / 2` for every `phi`.
pub fn watts_strogatz(n: usize, k: usize, phi: f64, seed: u64) -> Result<Graph, IngestError> {
    check_probability("phi", phi)?;
    if k < 2 || !k.is_multiple_of(2) || n <= k {
        return Err(IngestError::InvalidParameter(format!(
            "need n > k >= 2 with k even, got n = {n}, k = {k}"
        )));
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::with_capacity(k + 2); n];
    for i in 0..n {
        for j in 1..=k / 2 {
            let t = (i + j) % n;
            adj[i].push(t);
            adj[t].push(i);
        }
    }
    let mut rng = seed::rng(seed);
    for j in 1..=k / 2 {
        for i in 0..n {
            if !(phi > 0.0 && rng.random_bool(phi)) {
                continue;
            }
            if adj[i].len() >= n - 1 {
                continue;
            }
            let old = (i + j) % n;
            let new = loop {
                let w = rng.random_range(0..n);
                if w != i && !adj[i].contains(&w) {
                    break w;
                }
            };
            adj[i].retain(|&x| x != old);
            adj[old].retain(|&x| x != i);
            adj[i].push(new);
            adj[new].push(i);
        }
    }
    let mut edges = Vec::with_capacity(n * k / 2);
    for (u, list) in adj.iter().enumerate() {
        edges.extend(list.iter().filter(|&&v| u < v).map(|&v| (u, v)));
    }
    Ok(Graph::from_edges_dedup(n, &edges))
}

/// One-layer multiplex wrapping a simple graph; no inter-layer links.
pub fn lift_to_single_layer_multiplex(g: &Graph) -> MultiplexGraph {
    MultiplexGraph::from_single_layer(g, "0")
}

/// The layer with the most replicas (lowest layer index on ties), as a
/// simple graph indexed from 0.
pub fn largest_layer(g: &MultiplexGraph) -> (LayerId, Graph) {
    let sizes = g.layer_sizes();
    let mut best = 0;
    for (l, &s) in sizes.iter().enumerate() {
        if s > sizes[best] {
            best = l;
        }
    }
    (LayerId(best), g.layer_graph(LayerId(best)))
}

impl SyntheticSpec {
    /// Realizes the spec. `ErUnion` needs the base graph.
    pub fn generate(&self, base: Option<&Graph>) -> Result<Graph, IngestError> {
        match *self {
            SyntheticSpec::ErUnion { rho, seed } => {
                let base = base.ok_or_else(|| {
                    IngestError::InvalidParameter("ER union needs a base graph".into())
                })?;
                add_random_links(base, rho, seed)
            }
            SyntheticSpec::Ws { n, k, phi, seed } => watts_strogatz(n, k, phi, seed),
        }
    }
}
