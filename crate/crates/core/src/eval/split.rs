use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::graph::{LayerId, MultiplexGraph};
use crate::seed::{self, Rng};

/// A named pair list with a per-list tag.
pub(super) type Labeled<'a, T> = (&'a str, &'a [(usize, usize)], T);

/// Upper bound on the size of each sampled negative set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NegCap {
    /// At most `factor ×` the matching positive count.
    Multiple {
        factor: f64,
    },
    Absolute {
        count: usize,
    },
    Unlimited,
}

impl Default for NegCap {
    fn default() -> Self {
        NegCap::Multiple { factor: 10.0 }
    }
}

impl NegCap {
    fn limit(&self, positives: usize) -> usize {
        match *self {
            NegCap::Multiple { factor } => (factor * positives as f64).ceil() as usize,
            NegCap::Absolute { count } => count,
            NegCap::Unlimited => usize::MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub marked_fraction: f64,
    /// Share of the marked nodes' intra-layer links held out.
    pub intra_test_fraction: f64,
    /// Share of the intra-layer non-edges among marked nodes used as negatives.
    pub intra_negative_fraction: f64,
    /// Share of the cross-layer non-edges among marked nodes used as negatives.
    pub inter_negative_fraction: f64,
    pub neg_cap: NegCap,
    /// Hold out only intra-layer links with both endpoints marked, instead of
    /// links with at least one marked endpoint.
    pub both_endpoints_marked: bool,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            marked_fraction: 0.2,
            intra_test_fraction: 0.2,
            intra_negative_fraction: 0.2,
            inter_negative_fraction: 1.0,
            neg_cap: NegCap::default(),
            both_endpoints_marked: false,
            seed: 0,
        }
    }
}

/// Train/test partition of one graph. Pairs are stored as `(u, v)` with
/// `u < v`; every list is sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSplit {
    pub marked_nodes: Vec<usize>,
    pub train_pos_intra: Vec<(usize, usize)>,
    pub train_pos_inter: Vec<(usize, usize)>,
    pub test_pos_intra: Vec<(usize, usize)>,
    pub test_pos_inter: Vec<(usize, usize)>,
    /// Non-edges outside the test negatives, as many as train positives.
    /// Kept for the record; the training objective samples its own negatives.
    pub train_neg: Vec<(usize, usize)>,
    pub test_neg_intra: Vec<(usize, usize)>,
    pub test_neg_inter: Vec<(usize, usize)>,
    pub seed: u64,
}

impl EvalSplit {
    pub fn training_edges(&self) -> Vec<(usize, usize)> {
        let mut e = [self.train_pos_intra.as_slice(), &self.train_pos_inter].concat();
        e.sort_unstable();
        e
    }

    pub fn test_positives(&self) -> HashSet<(usize, usize)> {
        self.test_pos_intra
            .iter()
            .chain(&self.test_pos_inter)
            .copied()
            .collect()
    }

    /// The graph seen during training: all test positives removed.
    pub fn training_graph(&self, g: &MultiplexGraph) -> MultiplexGraph {
        g.without_edges(&self.test_positives())
    }

    /// Checks disjointness, that positives are edges and negatives non-edges
    /// of `g`, and that test pairs touch marked nodes.
    pub fn validate(&self, g: &MultiplexGraph) -> Result<(), String> {
        let n = g.node_count();
        let marked: HashSet<usize> = self.marked_nodes.iter().copied().collect();
        let mut seen = HashSet::new();
        let lists: [Labeled<'_, bool>; 7] = [
            ("train_pos_intra", &self.train_pos_intra, true),
            ("train_pos_inter", &self.train_pos_inter, true),
            ("test_pos_intra", &self.test_pos_intra, true),
            ("test_pos_inter", &self.test_pos_inter, true),
            ("train_neg", &self.train_neg, false),
            ("test_neg_intra", &self.test_neg_intra, false),
            ("test_neg_inter", &self.test_neg_inter, false),
        ];
        for (name, pairs, positive) in lists {
            for &(u, v) in pairs {
                if u >= v || v >= n {
                    return Err(format!("{name}: malformed pair ({u}, {v})"));
                }
                if !seen.insert((u, v)) {
                    return Err(format!("{name}: pair ({u}, {v}) appears twice"));
                }
                if positive != g.has_edge(u, v) {
                    return Err(format!("{name}: ({u}, {v}) has the wrong edge status"));
                }
                let same_layer = g.layer_of(u) == g.layer_of(v);
                let want_same = name.ends_with("intra");
                if (name.ends_with("intra") || name.ends_with("inter")) && same_layer != want_same {
                    return Err(format!("{name}: ({u}, {v}) has the wrong layer type"));
                }
                let touches = marked.contains(&u) || marked.contains(&v);
                let both = marked.contains(&u) && marked.contains(&v);
                if name.starts_with("test_pos") && !touches || name.starts_with("test_neg") && !both
                {
                    return Err(format!("{name}: ({u}, {v}) is not among marked nodes"));
                }
            }
        }
        let expected = g.intra_edge_count() + g.inter_edge_count();
        let positives = self.train_pos_intra.len()
            + self.train_pos_inter.len()
            + self.test_pos_intra.len()
            + self.test_pos_inter.len();
        if positives != expected {
            return Err(format!("{positives} positives for {expected} edges"));
        }
        Ok(())
    }
}

/// `round(fraction × total)`, at least 1 when the pool is nonempty.
fn share(fraction: f64, total: usize) -> usize {
    if total == 0 {
        0
    } else {
        ((fraction * total as f64).round() as usize).clamp(1, total)
    }
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

/// Below this pool size candidates are listed explicitly.
const ENUMERATE_LIMIT: usize = 1 << 20;

/// Uniform sample of `k` distinct pairs from a pool of known size. Small or
/// densely sampled pools are enumerated; otherwise `draw` proposes pairs and
/// invalid or repeated proposals are rejected.
fn sample_pairs(
    rng: &mut Rng,
    k: usize,
    pool: usize,
    enumerate: impl FnOnce() -> Vec<(usize, usize)>,
    mut draw: impl FnMut(&mut Rng) -> Option<(usize, usize)>,
) -> Vec<(usize, usize)> {
    let k = k.min(pool);
    let mut out = if pool <= ENUMERATE_LIMIT || k.saturating_mul(4) >= pool {
        let all = enumerate();
        debug_assert_eq!(all.len(), pool);
        index::sample(rng, all.len(), k)
            .into_iter()
            .map(|i| all[i])
            .collect()
    } else {
        let mut chosen = HashSet::with_capacity(k);
        while chosen.len() < k {
            if let Some(p) = draw(rng) {
                chosen.insert(p);
            }
        }
        chosen.into_iter().collect::<Vec<_>>()
    };
    out.sort_unstable();
    out
}

fn validate_fraction(name: &str, f: f64, allow_one: bool) -> Result<(), EvalError> {
    let ok = f > 0.0 && (f < 1.0 || allow_one && f == 1.0);
    if ok {
        Ok(())
    } else {
        Err(EvalError::InvalidParameter(format!("{name} = {f}")))
    }
}

/// Draws the marked nodes, test positives and test and train negatives.
pub fn make_split(g: &MultiplexGraph, config: &SplitConfig) -> Result<EvalSplit, EvalError> {
    validate_fraction("marked_fraction", config.marked_fraction, false)?;
    validate_fraction("intra_test_fraction", config.intra_test_fraction, false)?;
    validate_fraction(
        "intra_negative_fraction",
        config.intra_negative_fraction,
        true,
    )?;
    validate_fraction(
        "inter_negative_fraction",
        config.inter_negative_fraction,
        true,
    )?;
    let n = g.node_count();
    let marked_count = (config.marked_fraction * n as f64).round() as usize;
    if marked_count < 2 {
        return Err(EvalError::TooSmall(format!(
            "{n} replicas give {marked_count} marked nodes"
        )));
    }
    let mut rng = seed::rng(config.seed);

    let mut marked: Vec<usize> = index::sample(&mut rng, n, marked_count).into_vec();
    marked.sort_unstable();
    let mut is_marked = vec![false; n];
    for &m in &marked {
        is_marked[m] = true;
    }

    // positives
    let (candidates, mut train_pos_intra): (Vec<_>, Vec<_>) =
        g.intra_edges().into_iter().partition(|&(u, v)| {
            if config.both_endpoints_marked {
                is_marked[u] && is_marked[v]
            } else {
                is_marked[u] || is_marked[v]
            }
        });
    let held = share(config.intra_test_fraction, candidates.len());
    let mut pick = vec![false; candidates.len()];
    for i in index::sample(&mut rng, candidates.len(), held) {
        pick[i] = true;
    }
    let mut test_pos_intra = Vec::with_capacity(held);
    for (e, p) in candidates.into_iter().zip(pick) {
        if p {
            test_pos_intra.push(e);
        } else {
            train_pos_intra.push(e);
        }
    }
    train_pos_intra.sort_unstable();
    let (test_pos_inter, train_pos_inter): (Vec<_>, Vec<_>) = g
        .inter_edges()
        .into_iter()
        .partition(|&(u, v)| is_marked[u] || is_marked[v]);
    if test_pos_intra.is_empty() && test_pos_inter.is_empty() {
        return Err(EvalError::TooSmall(
            "no links touch the marked nodes".into(),
        ));
    }

    // intra negatives: same-layer non-edges among marked nodes
    let mut marked_by_layer: Vec<Vec<usize>> = vec![Vec::new(); g.layer_count()];
    for &m in &marked {
        marked_by_layer[g.layer_of(m).0].push(m);
    }
    let pairs_in = |c: usize| c * c.saturating_sub(1) / 2;
    let marked_intra_edges = g
        .intra_edges()
        .iter()
        .filter(|&&(u, v)| is_marked[u] && is_marked[v])
        .count();
    let intra_pool = marked_by_layer
        .iter()
        .map(|l| pairs_in(l.len()))
        .sum::<usize>()
        - marked_intra_edges;
    let intra_target = share(config.intra_negative_fraction, intra_pool)
        .min(config.neg_cap.limit(test_pos_intra.len()));
    let layer_weights: Vec<f64> = marked_by_layer
        .iter()
        .map(|l| pairs_in(l.len()) as f64)
        .collect();
    let test_neg_intra = sample_pairs(
        &mut rng,
        intra_target,
        intra_pool,
        || {
            let mut all = Vec::with_capacity(intra_pool);
            for l in &marked_by_layer {
                for (i, &u) in l.iter().enumerate() {
                    for &v in &l[i + 1..] {
                        if !g.has_intra_edge(u, v) {
                            all.push((u, v));
                        }
                    }
                }
            }
            all
        },
        {
            let layers = WeightedIndex::new(&layer_weights).ok();
            let marked_by_layer = &marked_by_layer;
            move |rng| {
                let l = &marked_by_layer[layers.as_ref()?.sample(rng)];
                let ij = index::sample(rng, l.len(), 2);
                let (u, v) = ordered(l[ij.index(0)], l[ij.index(1)]);
                (!g.has_intra_edge(u, v)).then_some((u, v))
            }
        },
    );

    // inter negatives: cross-layer non-edges among marked nodes
    let marked_inter_edges = test_pos_inter
        .iter()
        .filter(|&&(u, v)| is_marked[u] && is_marked[v])
        .count();
    let cross_pairs = pairs_in(marked.len())
        - marked_by_layer
            .iter()
            .map(|l| pairs_in(l.len()))
            .sum::<usize>();
    let inter_pool = cross_pairs - marked_inter_edges;
    let inter_target = share(config.inter_negative_fraction, inter_pool)
        .min(config.neg_cap.limit(test_pos_inter.len()));
    let layer_of = |u: usize| -> LayerId { g.layer_of(u) };
    let test_neg_inter = sample_pairs(
        &mut rng,
        inter_target,
        inter_pool,
        || {
            let mut all = Vec::with_capacity(inter_pool);
            for (i, &u) in marked.iter().enumerate() {
                for &v in &marked[i + 1..] {
                    if layer_of(u) != layer_of(v) && !g.has_inter_edge(u, v) {
                        all.push((u, v));
                    }
                }
            }
            all
        },
        |rng| {
            let ij = index::sample(rng, marked.len(), 2);
            let (u, v) = ordered(marked[ij.index(0)], marked[ij.index(1)]);
            (layer_of(u) != layer_of(v) && !g.has_inter_edge(u, v)).then_some((u, v))
        },
    );

    // train negatives: any remaining non-edge
    let taken: HashSet<(usize, usize)> = test_neg_intra
        .iter()
        .chain(&test_neg_inter)
        .copied()
        .collect();
    let edge_count = g.intra_edge_count() + g.inter_edge_count();
    let train_pool = pairs_in(n) - edge_count - taken.len();
    let train_positives = train_pos_intra.len() + train_pos_inter.len();
    let train_target = train_positives.min(config.neg_cap.limit(train_positives));
    let train_neg = sample_pairs(
        &mut rng,
        train_target,
        train_pool,
        || {
            let mut all = Vec::with_capacity(train_pool);
            for u in 0..n {
                for v in u + 1..n {
                    if !g.has_edge(u, v) && !taken.contains(&(u, v)) {
                        all.push((u, v));
                    }
                }
            }
            all
        },
        |rng| {
            let ij = index::sample(rng, n, 2);
            let (u, v) = ordered(ij.index(0), ij.index(1));
            (!g.has_edge(u, v) && !taken.contains(&(u, v))).then_some((u, v))
        },
    );

    Ok(EvalSplit {
        marked_nodes: marked,
        train_pos_intra,
        train_pos_inter,
        test_pos_intra,
        test_pos_inter,
        train_neg,
        test_neg_intra,
        test_neg_inter,
        seed: config.seed,
    })
}
