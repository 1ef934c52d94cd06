use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::graph::{build_graph, GraphSpec, LayerId, MultiplexGraph, Validation};

/// Where inter-layer links come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingPolicy {
    /// Replicas sharing a node label on different layers form a clique.
    #[default]
    DeriveSharedLabel,
    /// Couplings are read from a coupling file only.
    Explicit,
}

/// One intra-layer record `layer node_u node_v [weight]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRecord {
    pub line: usize,
    pub layer: String,
    pub u: String,
    pub v: String,
}

/// One coupling record `layer_a node_a layer_b node_b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingRecord {
    pub line: usize,
    pub layer_a: String,
    pub node_a: String,
    pub layer_b: String,
    pub node_b: String,
}

fn records<R: BufRead>(
    reader: R,
    arity: std::ops::RangeInclusive<usize>,
) -> Result<Vec<(usize, Vec<String>)>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = trimmed.split_whitespace().map(str::to_string).collect();
        if !arity.contains(&fields.len()) {
            return Err(IngestError::Parse {
                line: i + 1,
                message: format!(
                    "expected {} to {} fields, found {}",
                    arity.start(),
                    arity.end(),
                    fields.len()
                ),
            });
        }
        out.push((i + 1, fields));
    }
    Ok(out)
}

pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<Vec<EdgeRecord>, IngestError> {
    Ok(records(reader, 3..=4)?
        .into_iter()
        .map(|(line, mut f)| {
            f.truncate(3);
            let v = f.pop().unwrap();
            let u = f.pop().unwrap();
            let layer = f.pop().unwrap();
            EdgeRecord { line, layer, u, v }
        })
        .collect())
}

pub fn parse_couplings<R: BufRead>(reader: R) -> Result<Vec<CouplingRecord>, IngestError> {
    Ok(records(reader, 4..=4)?
        .into_iter()
        .map(|(line, f)| {
            let mut it = f.into_iter();
            CouplingRecord {
                line,
                layer_a: it.next().unwrap(),
                node_a: it.next().unwrap(),
                layer_b: it.next().unwrap(),
                node_b: it.next().unwrap(),
            }
        })
        .collect())
}

/// Layer labels sorted numerically when all are integers, otherwise in order
/// of first appearance.
fn layer_order(edges: &[EdgeRecord]) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut names: Vec<String> = edges
        .iter()
        .filter(|e| seen.insert(e.layer.as_str()))
        .map(|e| e.layer.clone())
        .collect();
    if names.iter().all(|n| n.parse::<u64>().is_ok()) {
        names.sort_by_key(|n| n.parse::<u64>().unwrap());
    }
    names
}

/// Builds the multiplex from parsed records and extracts its largest
/// connected component. Self-loops and repeated edges are dropped.
pub fn assemble_multiplex(
    edges: &[EdgeRecord],
    couplings: Option<&[CouplingRecord]>,
    policy: CouplingPolicy,
) -> Result<MultiplexGraph, IngestError> {
    if edges.is_empty() {
        return Err(IngestError::Empty);
    }
    let layers = layer_order(edges);
    let layer_index: HashMap<&str, usize> = layers
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();

    let mut replicas: Vec<(LayerId, String)> = Vec::new();
    let mut replica_index: HashMap<(usize, &str), usize> = HashMap::new();
    let mut intra = HashSet::new();
    let mut intra_edges = Vec::new();
    let mut dropped_loops = 0usize;
    for e in edges {
        let l = layer_index[e.layer.as_str()];
        let a = intern(&mut replica_index, &mut replicas, l, &e.u);
        let b = intern(&mut replica_index, &mut replicas, l, &e.v);
        if a == b {
            dropped_loops += 1;
            continue;
        }
        let key = (a.min(b), a.max(b));
        if intra.insert(key) {
            intra_edges.push(key);
        }
    }
    if dropped_loops > 0 {
        log::debug!("dropped {dropped_loops} self-loops");
    }

    let mut inter_edges = Vec::new();
    match policy {
        CouplingPolicy::DeriveSharedLabel => {
            let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for (i, (_, label)) in replicas.iter().enumerate() {
                by_label.entry(label.as_str()).or_default().push(i);
            }
            for members in by_label.values() {
                for (i, &a) in members.iter().enumerate() {
                    for &b in &members[i + 1..] {
                        inter_edges.push((a, b));
                    }
                }
            }
        }
        CouplingPolicy::Explicit => {
            let mut seen = HashSet::new();
            for c in couplings.unwrap_or(&[]) {
                let lookup = |layer: &str, node: &str| -> Result<usize, IngestError> {
                    layer_index
                        .get(layer)
                        .and_then(|&l| replica_index.get(&(l, node)))
                        .copied()
                        .ok_or_else(|| IngestError::UnknownReplica {
                            line: c.line,
                            layer: layer.to_string(),
                            node: node.to_string(),
                        })
                };
                let a = lookup(&c.layer_a, &c.node_a)?;
                let b = lookup(&c.layer_b, &c.node_b)?;
                if a == b {
                    continue;
                }
                if replicas[a].0 == replicas[b].0 {
                    return Err(IngestError::Parse {
                        line: c.line,
                        message: "coupling joins two replicas of the same layer".into(),
                    });
                }
                let key = (a.min(b), a.max(b));
                if seen.insert(key) {
                    inter_edges.push(key);
                }
            }
        }
    }

    let spec = GraphSpec {
        layers,
        replicas,
        intra_edges,
        inter_edges,
    };
    let g = build_graph(spec, Validation::Close)?;
    Ok(g.largest_connected_component())
}

fn intern<'a>(
    index: &mut HashMap<(usize, &'a str), usize>,
    replicas: &mut Vec<(LayerId, String)>,
    layer: usize,
    label: &'a str,
) -> usize {
    *index.entry((layer, label)).or_insert_with(|| {
        replicas.push((LayerId(layer), label.to_string()));
        replicas.len() - 1
    })
}

/// Loads a layered edge list (and optional coupling file) into the largest
/// connected component of the described multiplex.
pub fn load_multiplex(
    edge_file: &Path,
    coupling_file: Option<&Path>,
    policy: CouplingPolicy,
) -> Result<MultiplexGraph, IngestError> {
    let open = |p: &Path| {
        File::open(p)
            .map(BufReader::new)
            .map_err(|e| IngestError::Open(p.display().to_string(), e.to_string()))
    };
    let edges = parse_edge_list(open(edge_file)?)?;
    let couplings = match coupling_file {
        Some(p) => Some(parse_couplings(open(p)?)?),
        None => None,
    };
    if policy == CouplingPolicy::Explicit && couplings.is_none() {
        log::warn!("explicit coupling policy without a coupling file: no inter-layer links");
    }
    assemble_multiplex(&edges, couplings.as_deref(), policy)
}
