//! The MultiSAGE embedding engine.
//!
//! At depth `k` every replica `n` is updated as
//!
//! ```text
//! h_n^k = θ( W_H^k · mean_{m ∈ N_H(n)} h_m^{k-1}
//!          + W_V^k · mean_{m ∈ N_V(n)} h_m^{k-1}
//!          + S^k   · h_n^{k-1} )
//! ```
//!
//! where `N_H` and `N_V` are the intra- and inter-layer neighborhoods and an
//! empty neighborhood contributes the zero vector. GraphSAGE is the special
//! case with a single neighborhood `N_H ∪ N_V` and one matrix `W^k`. There is
//! no concatenation step. The weights are trained without supervision on the
//! negative-sampling loss
//!
//! ```text
//! J = − Σ_{(n,m) ∈ E} [ log σ(z_n·z_m) + Σ_{q=1..Q} log σ(−z_n·z_{m̄_q}) ],  m̄_q ~ P(n)
//! ```
//!
//! Gradients are derived by hand (see [`backward`]).

pub mod backward;
mod checkpoint;
pub mod forward;
pub mod loss;
mod optim;
mod params;
mod sampler;
mod topology;
mod train;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use backward::{gradients, loss_and_gradients, Gradients};
pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CheckpointError};
pub use forward::{embed, forward, sample_neighborhoods, ForwardCache};
pub use loss::{log_sigmoid, loss, sampled_loss, sigmoid, Negatives};
pub use optim::{Optimizer, OptimizerConfig};
pub use params::{DepthParams, ModelParams};
pub use sampler::{NegativeDistribution, NegativeSampler, SamplerConfig};
pub use topology::Topology;
pub use train::{train, TrainConfig, TrainOutcome};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("forward cache does not match this model or graph: {0}")]
    CacheMismatch(String),
    #[error("training edge ({0}, {1}) is not an edge of the training graph")]
    NotAnEdge(usize, usize),
    #[error("non-finite loss at epoch {epoch}, step {step}: {value}")]
    Diverged {
        epoch: usize,
        step: usize,
        value: f64,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no negative candidates for replica {0}")]
    NoNegativeCandidates(usize),
}

/// Algorithm variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Separate intra- and inter-layer neighborhoods with `W_H`, `W_V`.
    Multisage,
    /// One neighborhood over the flattened multiplex with a single `W`.
    Graphsage,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Multisage => "multisage",
            Mode::Graphsage => "graphsage",
        }
    }

    /// Number of neighborhood channels aggregated per depth.
    pub fn channels(&self) -> usize {
        match self {
            Mode::Multisage => 2,
            Mode::Graphsage => 1,
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "multisage" => Ok(Mode::Multisage),
            "graphsage" => Ok(Mode::Graphsage),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => sigmoid(x),
            Activation::Identity => x,
        }
    }

    /// Derivative at pre-activation `x`, given the activated value `y`.
    #[inline]
    pub fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Identity => 1.0,
        }
    }
}

/// Input node features.
#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    /// `x_{n,i} = δ_{ni}` over `n` replicas. Never materialized.
    OneHot(usize),
    /// Row `n` is `x_n`.
    Dense(Array2<f64>),
}

impl Features {
    pub fn node_count(&self) -> usize {
        match self {
            Features::OneHot(n) => *n,
            Features::Dense(x) => x.nrows(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Features::OneHot(n) => *n,
            Features::Dense(x) => x.ncols(),
        }
    }
}

/// One embedding row per replica.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable(pub Array2<f64>);

impl EmbeddingTable {
    pub fn node_count(&self) -> usize {
        self.0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn row(&self, n: usize) -> ArrayView1<'_, f64> {
        self.0.row(n)
    }

    /// `z_n · z_m`; cosine similarity when rows are normalized.
    pub fn score(&self, n: usize, m: usize) -> f64 {
        self.0.row(n).dot(&self.0.row(m))
    }
}

/// Link score `z_n · z_m`.
pub fn score_link(z: &EmbeddingTable, n: usize, m: usize) -> f64 {
    z.score(n, m)
}
