use ndarray::Array2;
use rand::Rng as _;

use super::{Activation, EmbedError, Mode};
use crate::seed;

/// Weights of one aggregation depth. `neighbor` holds `[W_H, W_V]` in
/// multisage mode and `[W]` in graphsage mode; every matrix is
/// `d_k × d_{k-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthParams {
    pub neighbor: Vec<Array2<f64>>,
    pub self_weight: Array2<f64>,
}

impl DepthParams {
    pub fn zeros(channels: usize, out_dim: usize, in_dim: usize) -> Self {
        Self {
            neighbor: (0..channels)
                .map(|_| Array2::zeros((out_dim, in_dim)))
                .collect(),
            self_weight: Array2::zeros((out_dim, in_dim)),
        }
    }

    /// Matrices in a fixed order: neighbor channels then self.
    pub fn matrices(&self) -> impl Iterator<Item = &Array2<f64>> {
        self.neighbor
            .iter()
            .chain(std::iter::once(&self.self_weight))
    }

    pub fn matrices_mut(&mut self) -> impl Iterator<Item = &mut Array2<f64>> {
        self.neighbor
            .iter_mut()
            .chain(std::iter::once(&mut self.self_weight))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub mode: Mode,
    /// `θ` at depths `1 … K−1`.
    pub activation: Activation,
    /// Activation of depth `K`; equal to `activation` unless overridden.
    pub output_activation: Activation,
    /// Unit-normalize the final embeddings (zero rows stay zero).
    pub normalize_output: bool,
    /// `[d_0, d_1, …, d_K]`.
    pub dims: Vec<usize>,
    pub depths: Vec<DepthParams>,
}

impl ModelParams {
    pub fn zeros(mode: Mode, activation: Activation, dims: &[usize]) -> Result<Self, EmbedError> {
        validate_dims(dims)?;
        Ok(Self {
            mode,
            activation,
            output_activation: activation,
            normalize_output: true,
            dims: dims.to_vec(),
            depths: dims
                .windows(2)
                .map(|w| DepthParams::zeros(mode.channels(), w[1], w[0]))
                .collect(),
        })
    }

    /// Glorot-uniform initialization from `seed`.
    pub fn glorot(
        mode: Mode,
        activation: Activation,
        dims: &[usize],
        seed: u64,
    ) -> Result<Self, EmbedError> {
        let mut p = Self::zeros(mode, activation, dims)?;
        let mut rng = seed::rng(seed);
        for d in &mut p.depths {
            for m in d.matrices_mut() {
                let (rows, cols) = m.dim();
                let limit = (6.0 / (rows + cols) as f64).sqrt();
                m.mapv_inplace(|_| rng.random_range(-limit..limit));
            }
        }
        Ok(p)
    }

    pub fn depth(&self) -> usize {
        self.depths.len()
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn with_output_activation(mut self, act: Activation) -> Self {
        self.output_activation = act;
        self
    }

    /// Activation applied at depth `k`, counted from 1.
    pub fn activation_at(&self, k: usize) -> Activation {
        if k == self.depth() {
            self.output_activation
        } else {
            self.activation
        }
    }

    pub fn with_normalization(mut self, on: bool) -> Self {
        self.normalize_output = on;
        self
    }

    /// `W_H^k` (or `W^k` in graphsage mode), `k` counted from 1.
    pub fn w_h(&self, k: usize) -> &Array2<f64> {
        &self.depths[k - 1].neighbor[0]
    }

    /// `W_V^k`; absent in graphsage mode.
    pub fn w_v(&self, k: usize) -> Option<&Array2<f64>> {
        match self.mode {
            Mode::Multisage => Some(&self.depths[k - 1].neighbor[1]),
            Mode::Graphsage => None,
        }
    }

    pub fn s(&self, k: usize) -> &Array2<f64> {
        &self.depths[k - 1].self_weight
    }

    pub fn parameter_count(&self) -> usize {
        self.depths
            .iter()
            .flat_map(|d| d.matrices())
            .map(|m| m.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.depths
            .iter()
            .flat_map(|d| d.matrices())
            .all(|m| m.iter().all(|x| x.is_finite()))
    }

    /// Checks shapes against `dims` and the mode.
    pub fn validate(&self) -> Result<(), EmbedError> {
        validate_dims(&self.dims)?;
        if self.depths.len() + 1 != self.dims.len() {
            return Err(EmbedError::Dimension(format!(
                "{} depths for dims {:?}",
                self.depths.len(),
                self.dims
            )));
        }
        for (k, d) in self.depths.iter().enumerate() {
            if d.neighbor.len() != self.mode.channels() {
                return Err(EmbedError::Dimension(format!(
                    "depth {} has {} neighbor matrices, {} mode needs {}",
                    k + 1,
                    d.neighbor.len(),
                    self.mode,
                    self.mode.channels()
                )));
            }
            let want = (self.dims[k + 1], self.dims[k]);
            for m in d.matrices() {
                if m.dim() != want {
                    return Err(EmbedError::Dimension(format!(
                        "depth {} matrix is {:?}, expected {:?}",
                        k + 1,
                        m.dim(),
                        want
                    )));
                }
            }
        }
        Ok(())
    }
}

fn validate_dims(dims: &[usize]) -> Result<(), EmbedError> {
    if dims.len() < 2 {
        return Err(EmbedError::Dimension(
            "need at least one aggregation depth".into(),
        ));
    }
    if dims.contains(&0) {
        return Err(EmbedError::Dimension(format!("zero dimension in {dims:?}")));
    }
    Ok(())
}
