use super::{EmbedError, Mode};
use crate::graph::{Csr, Graph, MultiplexGraph};

/// Neighborhood channels consumed by the aggregator: `[N_H, N_V]` for
/// multisage, `[N_H ∪ N_V]` for graphsage.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    mode: Mode,
    channels: Vec<Csr>,
    union: Csr,
}

impl Topology {
    pub fn new(g: &MultiplexGraph, mode: Mode) -> Self {
        match mode {
            Mode::Multisage => {
                let union = g.intra_adjacency().union(g.inter_adjacency());
                Self {
                    mode,
                    channels: vec![g.intra_adjacency().clone(), g.inter_adjacency().clone()],
                    union,
                }
            }
            Mode::Graphsage => Self::from_graph(&g.flattened().to_graph(), mode),
        }
    }

    /// A simple graph seen as a one-layer multiplex: in multisage mode the
    /// inter-layer channel is empty.
    pub fn from_graph(g: &Graph, mode: Mode) -> Self {
        let adj = g.adjacency().clone();
        let channels = match mode {
            Mode::Multisage => vec![adj.clone(), Csr::empty(adj.len())],
            Mode::Graphsage => vec![adj.clone()],
        };
        Self {
            mode,
            channels,
            union: adj,
        }
    }

    /// Explicit neighbor lists per channel. Lists are sorted, so the order in
    /// which neighbors are given never affects the result.
    pub fn from_lists(mode: Mode, channels: Vec<Vec<Vec<usize>>>) -> Result<Self, EmbedError> {
        if channels.len() != mode.channels() {
            return Err(EmbedError::Config(format!(
                "{} channels given for {mode}",
                channels.len()
            )));
        }
        let n = channels[0].len();
        for lists in &channels {
            if lists.len() != n || lists.iter().flatten().any(|&m| m >= n) {
                return Err(EmbedError::Config(
                    "channel lists disagree on node count".into(),
                ));
            }
        }
        let channels: Vec<Csr> = channels.into_iter().map(Csr::from_lists).collect();
        let union = channels
            .iter()
            .skip(1)
            .fold(channels[0].clone(), |acc, c| acc.union(c));
        Ok(Self {
            mode,
            channels,
            union,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn node_count(&self) -> usize {
        self.union.len()
    }

    pub fn channels(&self) -> &[Csr] {
        &self.channels
    }

    /// All neighbors regardless of type; used to exclude positives when
    /// drawing negatives.
    pub fn union(&self) -> &Csr {
        &self.union
    }
}
