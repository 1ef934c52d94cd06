//! Link-prediction evaluation.
//!
//! A random 20% of the replicas are *marked*. Test positives are a 20% subset
//! of the intra-layer links of the marked nodes plus all of their inter-layer
//! links; test negatives are non-edges among marked nodes. Links are scored by
//! `z_uᵀz_v` and summarized by the area under the ROC curve, separately for
//! intra- and inter-layer links.

mod aggregate;
mod delta;
mod roc;
mod split;
mod splitfile;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::{score_link, EmbeddingTable};

pub use aggregate::{aggregate_runs, Summary};
pub use delta::{delta, delta_value, layer_order_by_size, DeltaPoint, DeltaSeries};
pub use roc::{mann_whitney_auc, roc_auc, RocCurve};
pub use split::{make_split, EvalSplit, NegCap, SplitConfig};
pub use splitfile::{read_split, write_split};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty {0} score list")]
    EmptyScores(&'static str),
    #[error("non-finite score {0}")]
    NonFiniteScore(f64),
    #[error("invalid split parameter: {0}")]
    InvalidParameter(String),
    #[error("graph too small: {0}")]
    TooSmall(String),
    #[error("no embedding for replica {0}")]
    MissingEmbedding(usize),
    #[error("layer order: {0}")]
    LayerOrder(String),
    #[error("no runs to aggregate")]
    NoRuns,
    #[error("split file line {line}: {message}")]
    SplitFile { line: usize, message: String },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Intra- and inter-layer results on one split. A side without test
/// positives or negatives has no AUC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub auc_intra: Option<f64>,
    pub auc_inter: Option<f64>,
    #[serde(skip)]
    pub roc_intra: Option<RocCurve>,
    #[serde(skip)]
    pub roc_inter: Option<RocCurve>,
}

fn scores(z: &EmbeddingTable, pairs: &[(usize, usize)]) -> Result<Vec<f64>, EvalError> {
    if let Some(&(u, v)) = pairs
        .iter()
        .find(|&&(u, v)| u >= z.node_count() || v >= z.node_count())
    {
        return Err(EvalError::MissingEmbedding(u.max(v)));
    }
    Ok(pairs
        .par_iter()
        .map(|&(u, v)| score_link(z, u, v))
        .collect())
}

fn side(
    z: &EmbeddingTable,
    pos: &[(usize, usize)],
    neg: &[(usize, usize)],
) -> Result<Option<RocCurve>, EvalError> {
    let (p, n) = (scores(z, pos)?, scores(z, neg)?);
    if p.is_empty() || n.is_empty() {
        return Ok(None);
    }
    roc_auc(&p, &n).map(Some)
}

/// Scores every test pair of `split` and computes both ROC curves.
pub fn evaluate(z: &EmbeddingTable, split: &EvalSplit) -> Result<Evaluation, EvalError> {
    let roc_intra = side(z, &split.test_pos_intra, &split.test_neg_intra)?;
    let roc_inter = side(z, &split.test_pos_inter, &split.test_neg_inter)?;
    Ok(Evaluation {
        auc_intra: roc_intra.as_ref().map(|r| r.auc),
        auc_inter: roc_inter.as_ref().map(|r| r.auc),
        roc_intra,
        roc_inter,
    })
}
