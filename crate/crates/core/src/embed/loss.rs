//! Negative-sampling loss.

use ndarray::Array2;

use super::{EmbedError, EmbeddingTable, NegativeSampler};

/// Logistic function, evaluated without overflow for large `|x|`.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log σ(x) = −log(1 + e^{−x})`, never taking the log of an underflowed value.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Frozen negative draws: `q` replicas per positive edge, edge-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Negatives {
    q: usize,
    samples: Vec<usize>,
}

impl Negatives {
    pub fn new(q: usize, samples: Vec<usize>) -> Self {
        assert!(
            q > 0 && samples.len().is_multiple_of(q),
            "samples must be a multiple of q"
        );
        Self { q, samples }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn edge_count(&self) -> usize {
        self.samples.len() / self.q
    }

    /// Draws for the `i`-th positive edge.
    pub fn for_edge(&self, i: usize) -> &[usize] {
        &self.samples[i * self.q..(i + 1) * self.q]
    }
}

/// Neumaier-compensated running sum; the loss adds up `|E|(1+Q)` terms of
/// similar magnitude.
#[derive(Default)]
struct Accumulator {
    sum: f64,
    carry: f64,
}

impl Accumulator {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn check(z: &EmbeddingTable, edges: &[(usize, usize)], negatives: &Negatives) {
    assert_eq!(
        negatives.edge_count(),
        edges.len(),
        "one block of negatives per positive edge"
    );
    debug_assert!(edges
        .iter()
        .all(|&(a, b)| a < z.node_count() && b < z.node_count()));
}

/// `J = − Σ_{(n,m)} [ log σ(z_n·z_m) + Σ_q log σ(−z_n·z_{m̄_q}) ]`; negatives are
/// drawn for the first endpoint of each edge.
pub fn loss(z: &EmbeddingTable, edges: &[(usize, usize)], negatives: &Negatives) -> f64 {
    check(z, edges, negatives);
    let mut total = Accumulator::default();
    for (i, &(n, m)) in edges.iter().enumerate() {
        total.add(-log_sigmoid(z.score(n, m)));
        for &neg in negatives.for_edge(i) {
            total.add(-log_sigmoid(-z.score(n, neg)));
        }
    }
    total.value()
}

/// Loss together with `∂J/∂z`.
pub(crate) fn loss_and_output_grad(
    z: &EmbeddingTable,
    edges: &[(usize, usize)],
    negatives: &Negatives,
) -> (f64, Array2<f64>) {
    check(z, edges, negatives);
    let mut grad = Array2::zeros(z.0.raw_dim());
    let mut total = Accumulator::default();
    let accumulate = |a: usize, b: usize, g: f64, grad: &mut Array2<f64>| {
        // ∂(z_a·z_b)/∂z_a = z_b and vice versa
        grad.row_mut(a).scaled_add(g, &z.row(b));
        grad.row_mut(b).scaled_add(g, &z.row(a));
    };
    for (i, &(n, m)) in edges.iter().enumerate() {
        let s = z.score(n, m);
        total.add(-log_sigmoid(s));
        // d/ds −log σ(s) = −σ(−s)
        accumulate(n, m, -sigmoid(-s), &mut grad);
        for &neg in negatives.for_edge(i) {
            let s = z.score(n, neg);
            total.add(-log_sigmoid(-s));
            // d/ds −log σ(−s) = σ(s)
            accumulate(n, neg, sigmoid(s), &mut grad);
        }
    }
    (total.value(), grad)
}

/// Draws fresh negatives for `edges` and evaluates the loss.
pub fn sampled_loss(
    z: &EmbeddingTable,
    edges: &[(usize, usize)],
    sampler: &mut NegativeSampler<'_>,
) -> Result<f64, EmbedError> {
    let negatives = sampler.sample_batch(edges)?;
    Ok(loss(z, edges, &negatives))
}
