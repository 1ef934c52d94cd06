use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::csr::Csr;
use super::simple::Graph;
use super::GraphError;

/// Dense layer index in `0..L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LayerId(pub usize);

impl fmt::Display for LayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A node replica: one physical node as seen on one layer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Replica {
    pub layer: LayerId,
    pub label: String,
    pub index: usize,
}

/// How `build_graph` treats inter-layer links that break the multiplex
/// coupling constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Validation {
    /// Any violation is an error.
    #[default]
    Strict,
    /// Coupling components are transitively closed into cliques. A component
    /// holding two replicas of the same layer cannot be closed and is an error.
    Close,
    /// Violations are logged and returned but the edges are kept.
    Warn,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A replica has more than one inter-layer neighbor on `layer`.
    MultipleInterNeighbors { replica: usize, layer: LayerId },
    /// An inter-layer component that is neither a clique nor an isolated node.
    NotAClique { members: Vec<usize> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MultipleInterNeighbors { replica, layer } => write!(
                f,
                "replica {replica} has more than one inter-layer neighbor on layer {layer}"
            ),
            Violation::NotAClique { members } => {
                write!(f, "inter-layer component {members:?} is not a clique")
            }
        }
    }
}

/// Input to [`build_graph`]. Edge endpoints index into `replicas`.
#[derive(Debug, Clone, Default)]
pub struct GraphSpec {
    pub layers: Vec<String>,
    pub replicas: Vec<(LayerId, String)>,
    pub intra_edges: Vec<(usize, usize)>,
    pub inter_edges: Vec<(usize, usize)>,
}

/// Immutable multiplex network. Replica indices are grouped into contiguous
/// per-layer blocks ordered by layer id, so the supra-adjacency matrix is the
/// direct sum of the layer adjacencies plus the coupling matrix.
#[derive(Debug, Clone)]
pub struct MultiplexGraph {
    layer_names: Vec<String>,
    layer_offsets: Vec<usize>,
    replicas: Vec<Replica>,
    lookup: HashMap<(LayerId, String), usize>,
    intra: Csr,
    inter: Csr,
}

impl PartialEq for MultiplexGraph {
    fn eq(&self, other: &Self) -> bool {
        self.layer_names == other.layer_names
            && self.replicas == other.replicas
            && self.intra == other.intra
            && self.inter == other.inter
    }
}

pub fn build_graph(spec: GraphSpec, mode: Validation) -> Result<MultiplexGraph, GraphError> {
    build_graph_with_report(spec, mode).map(|(g, _)| g)
}

/// Same as [`build_graph`], also returning the violations found (only
/// non-empty in [`Validation::Warn`] mode).
pub fn build_graph_with_report(
    spec: GraphSpec,
    mode: Validation,
) -> Result<(MultiplexGraph, Vec<Violation>), GraphError> {
    let GraphSpec {
        layers,
        replicas,
        intra_edges,
        inter_edges,
    } = spec;
    if layers.is_empty() {
        return Err(GraphError::NoLayers);
    }
    let n = replicas.len();
    let mut seen = HashSet::with_capacity(n);
    for (layer, label) in &replicas {
        if layer.0 >= layers.len() {
            return Err(GraphError::UnknownLayer(layer.0));
        }
        if !seen.insert((*layer, label.as_str())) {
            return Err(GraphError::DuplicateReplica {
                layer: *layer,
                label: label.clone(),
            });
        }
    }
    drop(seen);

    // stable sort by layer gives the block ordering
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| replicas[i].0);
    let mut new_index = vec![0usize; n];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    let layer_of: Vec<LayerId> = order.iter().map(|&old| replicas[old].0).collect();

    let map_edges =
        |edges: &[(usize, usize)], intra: bool| -> Result<Vec<(usize, usize)>, GraphError> {
            let mut out = Vec::with_capacity(edges.len());
            for &(a, b) in edges {
                for x in [a, b] {
                    if x >= n {
                        return Err(GraphError::DanglingReplica(x));
                    }
                }
                let (u, v) = (new_index[a], new_index[b]);
                if u == v {
                    return Err(GraphError::SelfLoop(u));
                }
                let same = layer_of[u] == layer_of[v];
                if intra && !same {
                    return Err(GraphError::IntraAcrossLayers(u, v));
                }
                if !intra && same {
                    return Err(GraphError::InterWithinLayer(u, v));
                }
                out.push((u.min(v), u.max(v)));
            }
            let mut sorted = out.clone();
            sorted.sort_unstable();
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
            }
            Ok(sorted)
        };
    let intra = map_edges(&intra_edges, true)?;
    let mut inter = map_edges(&inter_edges, false)?;

    let violations = coupling_violations(n, &inter, &layer_of);
    match mode {
        Validation::Strict => {
            if let Some(v) = violations.into_iter().next() {
                return Err(GraphError::Constraint(v));
            }
        }
        Validation::Close => {
            inter = close_couplings(n, &inter, &layer_of)?;
        }
        Validation::Warn => {
            for v in &violations {
                log::warn!("multiplex coupling constraint violated: {v}");
            }
        }
    }
    let report = if mode == Validation::Warn {
        coupling_violations(n, &inter, &layer_of)
    } else {
        Vec::new()
    };

    let mut layer_offsets = vec![0usize; layers.len() + 1];
    for l in &layer_of {
        layer_offsets[l.0 + 1] += 1;
    }
    for i in 0..layers.len() {
        layer_offsets[i + 1] += layer_offsets[i];
    }
    let replicas: Vec<Replica> = order
        .iter()
        .enumerate()
        .map(|(index, &old)| Replica {
            layer: replicas[old].0,
            label: replicas[old].1.clone(),
            index,
        })
        .collect();
    let g = MultiplexGraph::assemble(
        layers,
        layer_offsets,
        replicas,
        Csr::from_undirected(n, &intra),
        Csr::from_undirected(n, &inter),
    );
    Ok((g, report))
}

fn inter_components(n: usize, inter: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let adj = Csr::from_undirected(n, inter);
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX || adj.degree(s) == 0 {
            continue;
        }
        let id = out.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut i = 0;
        while i < members.len() {
            let u = members[i];
            for &v in adj.neighbors(u) {
                if comp[v] == usize::MAX {
                    comp[v] = id;
                    members.push(v);
                }
            }
            i += 1;
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

fn coupling_violations(n: usize, inter: &[(usize, usize)], layer_of: &[LayerId]) -> Vec<Violation> {
    let adj = Csr::from_undirected(n, inter);
    let mut out = Vec::new();
    for r in 0..n {
        let mut layers: Vec<LayerId> = adj.neighbors(r).iter().map(|&m| layer_of[m]).collect();
        layers.sort_unstable();
        if let Some(w) = layers.windows(2).find(|w| w[0] == w[1]) {
            out.push(Violation::MultipleInterNeighbors {
                replica: r,
                layer: w[0],
            });
        }
    }
    for members in inter_components(n, inter) {
        let s = members.len();
        let edges: usize = members.iter().map(|&m| adj.degree(m)).sum::<usize>() / 2;
        if edges != s * (s - 1) / 2 {
            out.push(Violation::NotAClique { members });
        }
    }
    out
}

fn close_couplings(
    n: usize,
    inter: &[(usize, usize)],
    layer_of: &[LayerId],
) -> Result<Vec<(usize, usize)>, GraphError> {
    let mut out = Vec::new();
    for members in inter_components(n, inter) {
        let mut layers: Vec<LayerId> = members.iter().map(|&m| layer_of[m]).collect();
        layers.sort_unstable();
        if let Some(w) = layers.windows(2).find(|w| w[0] == w[1]) {
            let replica = *members.iter().find(|&&m| layer_of[m] == w[0]).unwrap();
            return Err(GraphError::Constraint(Violation::MultipleInterNeighbors {
                replica,
                layer: w[0],
            }));
        }
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                out.push((u, v));
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

impl MultiplexGraph {
    fn assemble(
        layer_names: Vec<String>,
        layer_offsets: Vec<usize>,
        replicas: Vec<Replica>,
        intra: Csr,
        inter: Csr,
    ) -> Self {
        let lookup = replicas
            .iter()
            .map(|r| ((r.layer, r.label.clone()), r.index))
            .collect();
        Self {
            layer_names,
            layer_offsets,
            replicas,
            lookup,
            intra,
            inter,
        }
    }

    pub fn node_count(&self) -> usize {
        self.replicas.len()
    }

    pub fn layer_count(&self) -> usize {
        self.layer_names.len()
    }

    pub fn layer_names(&self) -> &[String] {
        &self.layer_names
    }

    pub fn layer_name(&self, layer: LayerId) -> &str {
        &self.layer_names[layer.0]
    }

    pub fn layer_ids(&self) -> impl Iterator<Item = LayerId> {
        (0..self.layer_count()).map(LayerId)
    }

    /// N_α for every layer.
    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layer_offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Global index block of a layer.
    pub fn layer_range(&self, layer: LayerId) -> Range<usize> {
        self.layer_offsets[layer.0]..self.layer_offsets[layer.0 + 1]
    }

    pub fn replicas(&self) -> &[Replica] {
        &self.replicas
    }

    pub fn replica(&self, n: usize) -> &Replica {
        &self.replicas[n]
    }

    pub fn layer_of(&self, n: usize) -> LayerId {
        self.replicas[n].layer
    }

    pub fn find(&self, layer: LayerId, label: &str) -> Option<usize> {
        self.lookup.get(&(layer, label.to_string())).copied()
    }

    /// Intra-layer neighborhood (the horizontal neighborhood), sorted.
    pub fn intra_neighbors(&self, n: usize) -> &[usize] {
        self.intra.neighbors(n)
    }

    /// Inter-layer neighborhood (the vertical neighborhood), sorted.
    pub fn inter_neighbors(&self, n: usize) -> &[usize] {
        self.inter.neighbors(n)
    }

    pub fn intra_adjacency(&self) -> &Csr {
        &self.intra
    }

    pub fn inter_adjacency(&self) -> &Csr {
        &self.inter
    }

    pub fn intra_edge_count(&self) -> usize {
        self.intra.nnz() / 2
    }

    pub fn inter_edge_count(&self) -> usize {
        self.inter.nnz() / 2
    }

    pub fn intra_edges(&self) -> Vec<(usize, usize)> {
        self.intra.undirected_edges()
    }

    pub fn inter_edges(&self) -> Vec<(usize, usize)> {
        self.inter.undirected_edges()
    }

    pub fn has_intra_edge(&self, u: usize, v: usize) -> bool {
        self.intra.contains(u, v)
    }

    pub fn has_inter_edge(&self, u: usize, v: usize) -> bool {
        self.inter.contains(u, v)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.has_intra_edge(u, v) || self.has_inter_edge(u, v)
    }

    pub fn flattened(&self) -> FlattenedView<'_> {
        FlattenedView { g: self }
    }

    pub fn supra_adjacency(&self) -> SupraAdjacency {
        SupraAdjacency {
            pattern: self.intra.union(&self.inter),
        }
    }

    /// Connected components of the flattened graph, each sorted, listed in
    /// order of their smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            queue.push_back(s);
            let mut members = Vec::new();
            while let Some(u) = queue.pop_front() {
                members.push(u);
                for &v in self
                    .intra
                    .neighbors(u)
                    .iter()
                    .chain(self.inter.neighbors(u))
                {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Largest connected component under intra ∪ inter links. Ties go to the
    /// component holding the smallest global index. Layers left without
    /// replicas are dropped and the rest renumbered in their original order.
    pub fn largest_connected_component(&self) -> MultiplexGraph {
        let mut best: Option<Vec<usize>> = None;
        for c in self.connected_components() {
            if best.as_ref().is_none_or(|b| c.len() > b.len()) {
                best = Some(c);
            }
        }
        let mut keep = vec![false; self.node_count()];
        for n in best.unwrap_or_default() {
            keep[n] = true;
        }
        self.induced(&keep, true)
    }

    /// Sub-multiplex restricted to `layers`. Isolated replicas are kept.
    pub fn layer_subnetwork(&self, layers: &[LayerId]) -> Result<MultiplexGraph, GraphError> {
        if layers.is_empty() {
            return Err(GraphError::EmptyLayerSubset);
        }
        let mut wanted = vec![false; self.layer_count()];
        for l in layers {
            if l.0 >= self.layer_count() {
                return Err(GraphError::UnknownLayer(l.0));
            }
            wanted[l.0] = true;
        }
        let keep: Vec<bool> = self.replicas.iter().map(|r| wanted[r.layer.0]).collect();
        let mut sub = self.induced(&keep, false);
        // induced() keeps all layers when not dropping; remove unselected ones
        let old_names = std::mem::take(&mut sub.layer_names);
        let old_offsets = std::mem::take(&mut sub.layer_offsets);
        let mut remap = vec![usize::MAX; old_names.len()];
        let mut names = Vec::new();
        let mut offsets = vec![0];
        for (i, name) in old_names.into_iter().enumerate() {
            if wanted[i] {
                remap[i] = names.len();
                names.push(name);
                offsets.push(old_offsets[i + 1]);
            }
        }
        let replicas = sub
            .replicas
            .into_iter()
            .map(|r| Replica {
                layer: LayerId(remap[r.layer.0]),
                ..r
            })
            .collect();
        Ok(MultiplexGraph::assemble(
            names, offsets, replicas, sub.intra, sub.inter,
        ))
    }

    /// Same replicas and layers, with the given undirected edges removed.
    /// Pairs are matched regardless of orientation; pairs that are not edges
    /// are ignored.
    pub fn without_edges(&self, removed: &HashSet<(usize, usize)>) -> MultiplexGraph {
        let filter = |csr: &Csr| {
            let edges: Vec<(usize, usize)> = csr
                .undirected_edges()
                .into_iter()
                .filter(|e| !removed.contains(e))
                .collect();
            Csr::from_undirected(csr.len(), &edges)
        };
        let mut g = self.clone();
        g.intra = filter(&self.intra);
        g.inter = filter(&self.inter);
        g
    }

    fn induced(&self, keep: &[bool], drop_empty_layers: bool) -> MultiplexGraph {
        let mut new_index = vec![usize::MAX; self.node_count()];
        let mut next = 0;
        for (i, &k) in keep.iter().enumerate() {
            if k {
                new_index[i] = next;
                next += 1;
            }
        }
        let mut sizes = vec![0usize; self.layer_count()];
        for r in self.replicas.iter().filter(|r| keep[r.index]) {
            sizes[r.layer.0] += 1;
        }
        let mut layer_map = vec![usize::MAX; self.layer_count()];
        let mut names = Vec::new();
        let mut offsets = vec![0];
        for (l, &size) in sizes.iter().enumerate() {
            if drop_empty_layers && size == 0 {
                continue;
            }
            layer_map[l] = names.len();
            names.push(self.layer_names[l].clone());
            offsets.push(offsets.last().unwrap() + size);
        }
        let replicas: Vec<Replica> = self
            .replicas
            .iter()
            .filter(|r| keep[r.index])
            .map(|r| Replica {
                layer: LayerId(layer_map[r.layer.0]),
                label: r.label.clone(),
                index: new_index[r.index],
            })
            .collect();
        let remap = |csr: &Csr| {
            let edges: Vec<(usize, usize)> = csr
                .undirected_edges()
                .into_iter()
                .filter(|&(u, v)| keep[u] && keep[v])
                .map(|(u, v)| (new_index[u], new_index[v]))
                .collect();
            Csr::from_undirected(next, &edges)
        };
        MultiplexGraph::assemble(
            names,
            offsets,
            replicas,
            remap(&self.intra),
            remap(&self.inter),
        )
    }

    /// Single-layer graph of one layer, indexed locally from 0.
    pub fn layer_graph(&self, layer: LayerId) -> Graph {
        let range = self.layer_range(layer);
        let lists = range
            .clone()
            .map(|n| {
                self.intra
                    .neighbors(n)
                    .iter()
                    .map(|m| m - range.start)
                    .collect()
            })
            .collect();
        Graph::from_csr(Csr::from_lists(lists))
    }

    /// Wraps a simple graph as a one-layer multiplex; labels are the node indices.
    pub fn from_single_layer(g: &Graph, layer_name: &str) -> MultiplexGraph {
        let n = g.node_count();
        let replicas = (0..n)
            .map(|i| Replica {
                layer: LayerId(0),
                label: i.to_string(),
                index: i,
            })
            .collect();
        MultiplexGraph::assemble(
            vec![layer_name.to_string()],
            vec![0, n],
            replicas,
            g.adjacency().clone(),
            Csr::empty(n),
        )
    }
}

/// The flattened multiplex: all replicas, edges of both kinds with no type.
#[derive(Debug, Clone, Copy)]
pub struct FlattenedView<'a> {
    g: &'a MultiplexGraph,
}

impl FlattenedView<'_> {
    pub fn node_count(&self) -> usize {
        self.g.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.g.intra_edge_count() + self.g.inter_edge_count()
    }

    /// Sorted union of both neighborhoods.
    pub fn neighbors(&self, n: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.g.intra_neighbors(n).to_vec();
        out.extend_from_slice(self.g.inter_neighbors(n));
        out.sort_unstable();
        out
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = self.g.intra_edges();
        e.extend(self.g.inter_edges());
        e.sort_unstable();
        e
    }

    /// Materializes the view as a plain graph; edge types are erased.
    pub fn to_graph(&self) -> Graph {
        Graph::from_csr(self.g.intra.union(&self.g.inter))
    }
}

/// Sparse symmetric 0/1 supra-adjacency matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupraAdjacency {
    pattern: Csr,
}

impl SupraAdjacency {
    pub fn size(&self) -> usize {
        self.pattern.len()
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        u8::from(self.pattern.contains(i, j))
    }

    pub fn nnz(&self) -> usize {
        self.pattern.nnz()
    }

    /// Column indices of the nonzeros in row `i`.
    pub fn row(&self, i: usize) -> &[usize] {
        self.pattern.neighbors(i)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size()).all(|i| self.row(i).iter().all(|&j| self.pattern.contains(j, i)))
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let n = self.size();
        let mut m = vec![vec![0u8; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            for &j in self.pattern.neighbors(i) {
                row[j] = 1;
            }
        }
        m
    }
}
