//! MultiSAGE: inductive embedding of multiplex networks by mean aggregation
//! over separate intra-layer and inter-layer neighborhoods, with the
//! GraphSAGE baseline, link-prediction evaluation and experiment sweeps.

pub mod embed;
pub mod eval;
pub mod experiments;
pub mod graph;
pub mod ingest;
pub mod seed;
