//! Test-only oracles, independent of the library's numeric paths.
#![allow(dead_code)]

use multisage::embed::{
    forward, loss, Activation, DepthParams, Features, Mode, ModelParams, Negatives, Topology,
};
use multisage::graph::{build_graph, GraphSpec, LayerId, MultiplexGraph, Validation};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random multiplex on `layers` layers over `labels` physical nodes. Each
/// label is present on a layer with probability `presence`; intra edges are
/// drawn with probability `p_intra`; shared labels are coupled with
/// probability `p_couple` (then closed into cliques).
pub fn random_multiplex(
    seed: u64,
    layers: usize,
    labels: usize,
    presence: f64,
    p_intra: f64,
    p_couple: f64,
) -> MultiplexGraph {
    let mut r = rng(seed);
    let mut spec = GraphSpec {
        layers: (0..layers).map(|l| format!("L{l}")).collect(),
        ..Default::default()
    };
    let mut per_layer: Vec<Vec<(usize, usize)>> = vec![Vec::new(); layers];
    for l in 0..layers {
        for lab in 0..labels {
            if r.random_bool(presence) {
                per_layer[l].push((lab, spec.replicas.len()));
                spec.replicas.push((LayerId(l), lab.to_string()));
            }
        }
    }
    for members in &per_layer {
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                if r.random_bool(p_intra) {
                    spec.intra_edges.push((members[i].1, members[j].1));
                }
            }
        }
    }
    for lab in 0..labels {
        if !r.random_bool(p_couple) {
            continue;
        }
        let reps: Vec<usize> = per_layer
            .iter()
            .filter_map(|m| m.iter().find(|(l, _)| *l == lab).map(|&(_, i)| i))
            .collect();
        for w in reps.windows(2) {
            spec.inter_edges.push((w[0], w[1]));
        }
    }
    build_graph(spec, Validation::Close).unwrap()
}

/// 2 layers × nodes {1, 2}, both layers with edge 1–2, couplings 1–1 and 2–2.
pub fn two_by_two() -> MultiplexGraph {
    let spec = GraphSpec {
        layers: vec!["a".into(), "b".into()],
        replicas: vec![
            (LayerId(0), "1".into()),
            (LayerId(0), "2".into()),
            (LayerId(1), "1".into()),
            (LayerId(1), "2".into()),
        ],
        intra_edges: vec![(0, 1), (2, 3)],
        inter_edges: vec![(0, 2), (1, 3)],
    };
    build_graph(spec, Validation::Strict).unwrap()
}

fn matvec(m: &Array2<f64>, x: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[[i, j]] * x[j]).sum())
        .collect()
}

fn act(a: Activation, x: f64) -> f64 {
    match a {
        Activation::Relu => {
            if x > 0.0 {
                x
            } else {
                0.0
            }
        }
        Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
        Activation::Identity => x,
    }
}

/// Straight-line evaluation of the aggregation rule from the dense
/// supra-adjacency matrix. Diagonal blocks give the intra neighborhoods,
/// off-diagonal blocks the inter neighborhoods; graphsage uses whole rows.
pub fn dense_forward(g: &MultiplexGraph, params: &ModelParams, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let a = g.supra_adjacency().to_dense();
    let n = g.node_count();
    let mut h: Vec<Vec<f64>> = x.to_vec();
    for k in 1..=params.depth() {
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let mut neighborhoods: Vec<Vec<usize>> = Vec::new();
            let all: Vec<usize> = (0..n).filter(|&j| a[i][j] == 1).collect();
            match params.mode {
                Mode::Multisage => {
                    neighborhoods.push(
                        all.iter()
                            .copied()
                            .filter(|&j| g.layer_of(j) == g.layer_of(i))
                            .collect(),
                    );
                    neighborhoods.push(
                        all.iter()
                            .copied()
                            .filter(|&j| g.layer_of(j) != g.layer_of(i))
                            .collect(),
                    );
                }
                Mode::Graphsage => neighborhoods.push(all),
            }
            let d_out = params.dims[k];
            let mut pre = matvec(params.s(k), &h[i]);
            for (c, nb) in neighborhoods.iter().enumerate() {
                if nb.is_empty() {
                    continue;
                }
                let d_in = params.dims[k - 1];
                let mut mean = vec![0.0; d_in];
                for &j in nb {
                    for t in 0..d_in {
                        mean[t] += h[j][t] / nb.len() as f64;
                    }
                }
                let w = &params.depths[k - 1].neighbor[c];
                let contrib = matvec(w, &mean);
                for t in 0..d_out {
                    pre[t] += contrib[t];
                }
            }
            next.push(
                pre.into_iter()
                    .map(|v| act(params.activation_at(k), v))
                    .collect(),
            );
        }
        h = next;
    }
    if params.normalize_output {
        for row in &mut h {
            let r: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r > 0.0 {
                row.iter_mut().for_each(|v| *v /= r);
            }
        }
    }
    h
}

pub fn one_hot_rows(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn features_rows(f: &Features) -> Vec<Vec<f64>> {
    match f {
        Features::OneHot(n) => one_hot_rows(*n),
        Features::Dense(x) => x.rows().into_iter().map(|r| r.to_vec()).collect(),
    }
}

/// Loss as a function of the parameters, through the library forward pass.
pub fn loss_at(
    params: &ModelParams,
    topo: &Topology,
    features: &Features,
    edges: &[(usize, usize)],
    negatives: &Negatives,
) -> f64 {
    let cache = forward(params, topo, features, None).unwrap();
    loss(cache.embeddings(), edges, negatives)
}

/// Central finite differences over every weight entry.
pub fn finite_difference(
    params: &ModelParams,
    topo: &Topology,
    features: &Features,
    edges: &[(usize, usize)],
    negatives: &Negatives,
    step: f64,
) -> Vec<DepthParams> {
    let mut out = Vec::new();
    for k in 0..params.depth() {
        let channels = params.depths[k].neighbor.len();
        let mut grads = DepthParams::zeros(channels, params.dims[k + 1], params.dims[k]);
        for which in 0..=channels {
            let (rows, cols) = (params.dims[k + 1], params.dims[k]);
            for i in 0..rows {
                for j in 0..cols {
                    let eval = |delta: f64| {
                        let mut p = params.clone();
                        let m = if which < channels {
                            &mut p.depths[k].neighbor[which]
                        } else {
                            &mut p.depths[k].self_weight
                        };
                        m[[i, j]] += delta;
                        loss_at(&p, topo, features, edges, negatives)
                    };
                    let fd = (eval(step) - eval(-step)) / (2.0 * step);
                    if which < channels {
                        grads.neighbor[which][[i, j]] = fd;
                    } else {
                        grads.self_weight[[i, j]] = fd;
                    }
                }
            }
        }
        out.push(grads);
    }
    out
}

/// Relative error with an absolute floor, so entries that are zero up to
/// rounding do not inflate the ratio.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

pub fn max_relative_error(analytic: &[DepthParams], numeric: &[DepthParams]) -> f64 {
    let mut worst = 0.0f64;
    for (a, n) in analytic.iter().zip(numeric) {
        for (ma, mn) in a.matrices().zip(n.matrices()) {
            for (x, y) in ma.iter().zip(mn.iter()) {
                worst = worst.max(relative_error(*x, *y));
            }
        }
    }
    worst
}

/// Smallest |pre-activation| over all depths; relu is not differentiable at 0.
pub fn min_abs_preactivation(params: &ModelParams, topo: &Topology, features: &Features) -> f64 {
    let cache = forward(params, topo, features, None).unwrap();
    (1..=params.depth())
        .flat_map(|k| {
            cache
                .pre_activation(k)
                .iter()
                .map(|v| v.abs())
                .collect::<Vec<_>>()
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn random_dense_features(n: usize, d: usize, seed: u64) -> Features {
    let mut r = rng(seed);
    Features::Dense(Array2::from_shape_fn((n, d), |_| r.random_range(-1.0..1.0)))
}

/// Negatives drawn uniformly among non-neighbors, test-side.
pub fn frozen_negatives(
    g_union: &dyn Fn(usize, usize) -> bool,
    n: usize,
    edges: &[(usize, usize)],
    q: usize,
    seed: u64,
) -> Negatives {
    let mut r = rng(seed);
    let mut samples = Vec::new();
    for &(u, _) in edges {
        for _ in 0..q {
            loop {
                let m = r.random_range(0..n);
                if m != u && !g_union(u, m) {
                    samples.push(m);
                    break;
                }
                if (0..n).all(|c| c == u || g_union(u, c)) {
                    samples.push((u + 1) % n);
                    break;
                }
            }
        }
    }
    Negatives::new(q, samples)
}
