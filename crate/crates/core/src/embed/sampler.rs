use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{EmbedError, Negatives};
use crate::graph::Csr;
use crate::seed::{self, Rng};

/// Negative-sampling distribution `P(n)`, always supported on the replicas
/// that are neither `n` nor adjacent to `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NegativeDistribution {
    #[default]
    Uniform,
    /// Proportional to `degree^power` (word2vec uses 0.75).
    DegreePower { power: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    /// Negatives per positive edge.
    pub q: usize,
    #[serde(default)]
    pub distribution: NegativeDistribution,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            q: 5,
            distribution: NegativeDistribution::Uniform,
            seed: 0,
        }
    }
}

pub struct NegativeSampler<'a> {
    adj: &'a Csr,
    q: usize,
    weights: Option<(Vec<f64>, WeightedIndex<f64>)>,
    rng: Rng,
    fallbacks: usize,
}

impl<'a> NegativeSampler<'a> {
    /// `adj` is the full (flattened) adjacency whose edges are positives.
    pub fn new(adj: &'a Csr, config: &SamplerConfig) -> Result<Self, EmbedError> {
        if config.q == 0 {
            return Err(EmbedError::Config("q must be at least 1".into()));
        }
        let weights = match config.distribution {
            NegativeDistribution::Uniform => None,
            NegativeDistribution::DegreePower { power } => {
                if !power.is_finite() {
                    return Err(EmbedError::Config(format!("degree power {power}")));
                }
                let w: Vec<f64> = (0..adj.len())
                    .map(|n| {
                        let d = adj.degree(n);
                        if d == 0 {
                            0.0
                        } else {
                            (d as f64).powf(power)
                        }
                    })
                    .collect();
                // all-isolated graphs fall back to uniform
                WeightedIndex::new(&w).ok().map(|idx| (w, idx))
            }
        };
        Ok(Self {
            adj,
            q: config.q,
            weights,
            rng: seed::rng(config.seed),
            fallbacks: 0,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// How many times the empty-support fallback fired.
    pub fn fallbacks(&self) -> usize {
        self.fallbacks
    }

    fn excluded(&self, n: usize, m: usize) -> bool {
        m == n || self.adj.contains(n, m)
    }

    /// `q` i.i.d. draws from `P(n)`. When every other replica is adjacent to
    /// `n` the draws come from all replicas except `n`.
    pub fn sample(&mut self, n: usize) -> Result<Vec<usize>, EmbedError> {
        let total = self.adj.len();
        if total < 2 {
            return Err(EmbedError::NoNegativeCandidates(n));
        }
        let support = total - 1 - self.adj.degree(n);
        if support == 0 {
            if self.fallbacks == 0 {
                log::warn!(
                    "replica {n} is adjacent to every other replica; drawing negatives from all replicas"
                );
            }
            self.fallbacks += 1;
            return Ok((0..self.q)
                .map(|_| {
                    let m = self.rng.random_range(0..total - 1);
                    if m >= n {
                        m + 1
                    } else {
                        m
                    }
                })
                .collect());
        }
        let mut out = Vec::with_capacity(self.q);
        if let Some((w, idx)) = &self.weights {
            let excluded_weight: f64 =
                w[n] + self.adj.neighbors(n).iter().map(|&m| w[m]).sum::<f64>();
            let available = idx.total_weight() - excluded_weight;
            if available > 1e-12 * idx.total_weight() {
                while out.len() < self.q {
                    let m = idx.sample(&mut self.rng);
                    if !self.excluded(n, m) {
                        out.push(m);
                    }
                }
                return Ok(out);
            }
            // non-neighbors all have zero weight: uniform over them
        }
        if support * 8 >= total {
            while out.len() < self.q {
                let m = self.rng.random_range(0..total);
                if !self.excluded(n, m) {
                    out.push(m);
                }
            }
        } else {
            let candidates: Vec<usize> = (0..total).filter(|&m| !self.excluded(n, m)).collect();
            for _ in 0..self.q {
                out.push(candidates[self.rng.random_range(0..candidates.len())]);
            }
        }
        Ok(out)
    }

    /// Draws for the first endpoint of every edge.
    pub fn sample_batch(&mut self, edges: &[(usize, usize)]) -> Result<Negatives, EmbedError> {
        let mut samples = Vec::with_capacity(edges.len() * self.q);
        for &(n, _) in edges {
            samples.extend(self.sample(n)?);
        }
        Ok(Negatives::new(self.q, samples))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(n: usize) -> Csr {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (0, i)).collect();
        Csr::from_undirected(n, &edges)
    }

    #[test]
    fn star_center_falls_back() {
        let adj = star(6);
        let mut s = NegativeSampler::new(&adj, &SamplerConfig::default()).unwrap();
        let draws = s.sample(0).unwrap();
        assert_eq!(draws.len(), 5);
        assert!(draws.iter().all(|&m| m != 0 && m < 6));
        assert_eq!(s.fallbacks(), 1);
        // a leaf has non-neighbors
        let leaf = s.sample(1).unwrap();
        assert!(leaf.iter().all(|&m| m != 0 && m != 1));
        assert_eq!(s.fallbacks(), 1);
    }

    #[test]
    fn uniform_is_reproducible_and_excludes_neighbors() {
        let adj = Csr::from_undirected(50, &(0..49).map(|i| (i, i + 1)).collect::<Vec<_>>());
        let cfg = SamplerConfig {
            q: 7,
            seed: 42,
            ..Default::default()
        };
        let a = NegativeSampler::new(&adj, &cfg)
            .unwrap()
            .sample_batch(&[(10, 11), (3, 4)])
            .unwrap();
        let b = NegativeSampler::new(&adj, &cfg)
            .unwrap()
            .sample_batch(&[(10, 11), (3, 4)])
            .unwrap();
        assert_eq!(a, b);
        assert!(a.for_edge(0).iter().all(|&m| ![9, 10, 11].contains(&m)));
    }

    #[test]
    fn dense_neighborhood_uses_enumeration() {
        // node 0 adjacent to all but node 9
        let edges: Vec<(usize, usize)> = (1..9).map(|i| (0, i)).collect();
        let adj = Csr::from_undirected(10, &edges);
        let mut s = NegativeSampler::new(
            &adj,
            &SamplerConfig {
                q: 20,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(s.sample(0).unwrap().iter().all(|&m| m == 9));
    }

    #[test]
    fn rejects_zero_q() {
        let adj = star(3);
        assert!(NegativeSampler::new(
            &adj,
            &SamplerConfig {
                q: 0,
                ..Default::default()
            }
        )
        .is_err());
    }
}
