use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use super::{Gradients, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimizerConfig {
    Sgd,
    Adam {
        #[serde(default = "beta1")]
        beta1: f64,
        #[serde(default = "beta2")]
        beta2: f64,
        #[serde(default = "eps")]
        eps: f64,
    },
}

fn beta1() -> f64 {
    0.9
}
fn beta2() -> f64 {
    0.999
}
fn eps() -> f64 {
    1e-8
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::Adam {
            beta1: beta1(),
            beta2: beta2(),
            eps: eps(),
        }
    }
}

/// Stateful first-order optimizer over all weight matrices.
#[derive(Debug, Clone)]
pub struct Optimizer {
    config: OptimizerConfig,
    lr: f64,
    step: i32,
    moments: Vec<(Array2<f64>, Array2<f64>)>,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig, lr: f64, params: &ModelParams) -> Self {
        let moments = match config {
            OptimizerConfig::Sgd => Vec::new(),
            OptimizerConfig::Adam { .. } => params
                .depths
                .iter()
                .flat_map(|d| d.matrices())
                .map(|m| (Array2::zeros(m.raw_dim()), Array2::zeros(m.raw_dim())))
                .collect(),
        };
        Self {
            config,
            lr,
            step: 0,
            moments,
        }
    }

    pub fn step(&mut self, params: &mut ModelParams, grads: &Gradients) {
        self.step += 1;
        let lr = self.lr;
        let pairs = params
            .depths
            .iter_mut()
            .flat_map(|d| d.matrices_mut())
            .zip(grads.depths.iter().flat_map(|d| d.matrices()));
        match self.config {
            OptimizerConfig::Sgd => {
                for (p, g) in pairs {
                    p.scaled_add(-lr, g);
                }
            }
            OptimizerConfig::Adam { beta1, beta2, eps } => {
                let c1 = 1.0 - beta1.powi(self.step);
                let c2 = 1.0 - beta2.powi(self.step);
                for ((p, g), (m, v)) in pairs.zip(self.moments.iter_mut()) {
                    Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| {
                        *m = beta1 * *m + (1.0 - beta1) * g;
                        *v = beta2 * *v + (1.0 - beta2) * g * g;
                        *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                    });
                }
            }
        }
    }
}
