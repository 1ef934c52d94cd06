use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::forward::{embed, forward, sample_neighborhoods};
use super::{
    loss_and_gradients, EmbedError, EmbeddingTable, Features, ModelParams, NegativeSampler,
    Optimizer, OptimizerConfig, SamplerConfig, Topology,
};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    /// Positive edges per optimizer step; 0 means the full edge set.
    #[serde(default)]
    pub batch_size: usize,
    /// Per-depth neighbor budgets `[S_1, …, S_K]`; full neighborhoods when absent.
    #[serde(default)]
    pub neighbor_sample_sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: u64,
}

fn default_lr() -> f64 {
    1e-3
}

fn default_epochs() -> usize {
    100
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            learning_rate: default_lr(),
            epochs: default_epochs(),
            batch_size: 0,
            neighbor_sample_sizes: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// Full-neighborhood embeddings of the trained model.
    pub embeddings: EmbeddingTable,
    /// Mean loss per positive edge, one entry per epoch.
    pub loss_history: Vec<f64>,
}

/// Minimizes the negative-sampling loss over `training_edges`. Each step
/// redraws negatives, runs the forward pass, back-propagates the batch mean
/// loss and applies one optimizer update. Single-threaded and fully
/// determined by the two seeds.
pub fn train(
    topo: &Topology,
    features: &Features,
    training_edges: &[(usize, usize)],
    mut params: ModelParams,
    config: &TrainConfig,
    sampler_config: &SamplerConfig,
) -> Result<TrainOutcome, EmbedError> {
    if !(config.learning_rate >= 0.0 && config.learning_rate.is_finite()) {
        return Err(EmbedError::Config(format!(
            "learning rate {} must be a non-negative number",
            config.learning_rate
        )));
    }
    if config.epochs == 0 {
        return Err(EmbedError::Config("epochs must be at least 1".into()));
    }
    if let Some(sizes) = &config.neighbor_sample_sizes {
        if sizes.len() != params.depth() {
            return Err(EmbedError::Config(format!(
                "{} neighbor sample sizes for depth {}",
                sizes.len(),
                params.depth()
            )));
        }
    }
    if training_edges.is_empty() {
        return Err(EmbedError::Config("no training edges".into()));
    }
    for &(u, v) in training_edges {
        if u >= topo.node_count() || v >= topo.node_count() || !topo.union().contains(u, v) {
            return Err(EmbedError::NotAnEdge(u, v));
        }
    }

    let mut rng = seed::rng(config.seed);
    let mut sampler = NegativeSampler::new(topo.union(), sampler_config)?;
    let mut optimizer = Optimizer::new(config.optimizer, config.learning_rate, &params);
    let batch = if config.batch_size == 0 {
        training_edges.len()
    } else {
        config.batch_size
    };

    let mut edges = training_edges.to_vec();
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        edges.shuffle(&mut rng);
        for e in edges.iter_mut() {
            if rng.random_bool(0.5) {
                *e = (e.1, e.0);
            }
        }
        let mut epoch_loss = 0.0;
        for (step, chunk) in edges.chunks(batch).enumerate() {
            let negatives = sampler.sample_batch(chunk)?;
            let samples = config
                .neighbor_sample_sizes
                .as_ref()
                .map(|s| sample_neighborhoods(topo, s, &mut rng));
            let cache = forward(&params, topo, features, samples)?;
            let (loss, mut grads) =
                loss_and_gradients(&params, topo, features, chunk, &negatives, &cache)?;
            if !loss.is_finite() {
                return Err(EmbedError::Diverged {
                    epoch,
                    step,
                    value: loss,
                });
            }
            grads.scale(1.0 / chunk.len() as f64);
            optimizer.step(&mut params, &grads);
            log::debug!(
                "epoch {epoch} step {step}: loss {:.6}",
                loss / chunk.len() as f64
            );
            epoch_loss += loss;
        }
        let mean = epoch_loss / edges.len() as f64;
        log::info!("epoch {epoch}: mean loss {mean:.6}");
        history.push(mean);
    }
    if !params.is_finite() {
        return Err(EmbedError::Diverged {
            epoch: config.epochs,
            step: 0,
            value: f64::NAN,
        });
    }
    let embeddings = embed(&params, topo, features)?;
    Ok(TrainOutcome {
        params,
        embeddings,
        loss_history: history,
    })
}
