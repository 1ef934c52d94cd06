//! Dataset loading and synthetic network generation.
//!
//! Edge lists are ASCII, one record per line: `layer node_u node_v [weight]`,
//! whitespace separated, `#` starts a comment line, weights are ignored.
//! Coupling files list explicit inter-layer links as
//! `layer_a node_a layer_b node_b`.

mod edgelist;
mod synthetic;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, MultiplexGraph};

pub use edgelist::{
    assemble_multiplex, load_multiplex, parse_couplings, parse_edge_list, CouplingPolicy,
    CouplingRecord, EdgeRecord,
};
pub use synthetic::{
    add_random_links, largest_layer, lift_to_single_layer_multiplex, watts_strogatz, SyntheticSpec,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open {0}: {1}")]
    Open(String, String),
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown replica {node:?} on layer {layer:?}")]
    UnknownReplica {
        line: usize,
        layer: String,
        node: String,
    },
    #[error("edge list contains no edges")]
    Empty,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Node, layer and link counts of a multiplex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub layers: usize,
    pub intra: usize,
    pub inter: usize,
}

impl GraphSummary {
    pub fn of(g: &MultiplexGraph) -> Self {
        Self {
            nodes: g.node_count(),
            layers: g.layer_count(),
            intra: g.intra_edge_count(),
            inter: g.inter_edge_count(),
        }
    }

    /// Field-by-field differences against a reference, as `(field, got, expected)`.
    pub fn mismatches(&self, reference: &GraphSummary) -> Vec<(&'static str, usize, usize)> {
        [
            ("nodes", self.nodes, reference.nodes),
            ("layers", self.layers, reference.layers),
            ("intra", self.intra, reference.intra),
            ("inter", self.inter, reference.inter),
        ]
        .into_iter()
        .filter(|(_, a, b)| a != b)
        .collect()
    }
}

impl fmt::Display for GraphSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} nodes, {} layers, {} intra, {} inter",
            self.nodes, self.layers, self.intra, self.inter
        )
    }
}

/// Published largest-connected-component statistics of the benchmark
/// multiplexes, keyed by dataset name.
pub fn reference_summary(name: &str) -> Option<GraphSummary> {
    let (nodes, layers, intra, inter) = match name.to_ascii_lowercase().as_str() {
        "arxiv" => (19310, 13, 48657, 20738),
        "drosophila" => (11867, 7, 40228, 5173),
        "ff-tw-yt" => (11827, 3, 74815, 6028),
        _ => return None,
    };
    Some(GraphSummary {
        nodes,
        layers,
        intra,
        inter,
    })
}
