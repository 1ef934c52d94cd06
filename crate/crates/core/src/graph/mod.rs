//! Multiplex network model.
//!
//! A [`MultiplexGraph`] holds `N = Σ N_α` replicas split into per-layer index
//! blocks, an intra-layer adjacency (the diagonal blocks `A^α` of the
//! supra-adjacency matrix) and an inter-layer coupling adjacency (the matrix
//! `C`). Inter-layer components must be cliques or isolated nodes, and a
//! replica couples to at most one replica per other layer.

mod csr;
mod multiplex;
mod simple;

use thiserror::Error;

pub use csr::Csr;
pub use multiplex::{
    build_graph, build_graph_with_report, FlattenedView, GraphSpec, LayerId, MultiplexGraph,
    Replica, SupraAdjacency, Validation, Violation,
};
pub use simple::Graph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("a multiplex needs at least one layer")]
    NoLayers,
    #[error("unknown layer {0}")]
    UnknownLayer(usize),
    #[error("replica {label:?} declared twice on layer {layer}")]
    DuplicateReplica { layer: LayerId, label: String },
    #[error("edge references undeclared replica {0}")]
    DanglingReplica(usize),
    #[error("self-loop on replica {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("intra-layer edge ({0}, {1}) joins different layers")]
    IntraAcrossLayers(usize, usize),
    #[error("inter-layer edge ({0}, {1}) joins replicas of the same layer")]
    InterWithinLayer(usize, usize),
    #[error("coupling constraint violated: {0}")]
    Constraint(Violation),
    #[error("layer subset is empty")]
    EmptyLayerSubset,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(layers: &[&str], replicas: &[(usize, &str)]) -> GraphSpec {
        GraphSpec {
            layers: layers.iter().map(|s| s.to_string()).collect(),
            replicas: replicas
                .iter()
                .map(|&(l, s)| (LayerId(l), s.to_string()))
                .collect(),
            ..Default::default()
        }
    }

    /// Two layers a, b with nodes 1, 2 on each; 1–2 on both; 1 and 2 coupled.
    pub(crate) fn two_by_two() -> MultiplexGraph {
        let mut s = spec(&["a", "b"], &[(0, "1"), (0, "2"), (1, "1"), (1, "2")]);
        s.intra_edges = vec![(0, 1), (2, 3)];
        s.inter_edges = vec![(0, 2), (1, 3)];
        build_graph(s, Validation::Strict).unwrap()
    }

    #[test]
    fn two_layer_example_counts() {
        let g = two_by_two();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.layer_count(), 2);
        assert_eq!(g.intra_edge_count(), 2);
        assert_eq!(g.inter_edge_count(), 2);
        assert_eq!(g.layer_sizes(), vec![2, 2]);
    }

    #[test]
    fn supra_adjacency_block_structure() {
        let a = two_by_two().supra_adjacency();
        let expected = vec![
            vec![0, 1, 1, 0],
            vec![1, 0, 0, 1],
            vec![1, 0, 0, 1],
            vec![0, 1, 1, 0],
        ];
        assert_eq!(a.to_dense(), expected);
        assert!(a.is_symmetric());
        assert_eq!(a.nnz(), 8);
    }

    #[test]
    fn supra_adjacency_without_couplings_is_block_diagonal() {
        let mut s = spec(&["a", "b"], &[(0, "1"), (0, "2"), (1, "1"), (1, "2")]);
        s.intra_edges = vec![(0, 1), (2, 3)];
        let a = build_graph(s, Validation::Strict)
            .unwrap()
            .supra_adjacency();
        let d = a.to_dense();
        for i in 0..2 {
            for j in 2..4 {
                assert_eq!(d[i][j], 0);
                assert_eq!(d[j][i], 0);
            }
        }
        assert_eq!(d[0][1], 1);
        assert_eq!(d[2][3], 1);
    }

    #[test]
    fn single_layer_supra_equals_layer_adjacency() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let m = MultiplexGraph::from_single_layer(&g, "only");
        let a = m.supra_adjacency();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(a.get(i, j) == 1, g.has_edge(i, j));
            }
        }
    }

    #[test]
    fn replicas_grouped_by_layer() {
        // declared out of layer order
        let mut s = spec(&["a", "b"], &[(1, "x"), (0, "x"), (1, "y"), (0, "y")]);
        s.intra_edges = vec![(0, 2), (1, 3)];
        let g = build_graph(s, Validation::Strict).unwrap();
        let layers: Vec<usize> = g.replicas().iter().map(|r| r.layer.0).collect();
        assert_eq!(layers, vec![0, 0, 1, 1]);
        assert_eq!(g.find(LayerId(1), "x"), Some(2));
        assert_eq!(g.layer_range(LayerId(1)), 2..4);
    }

    #[test]
    fn close_mode_completes_chain() {
        let mut s = spec(&["a", "b", "c"], &[(0, "1"), (1, "1"), (2, "1")]);
        s.inter_edges = vec![(0, 1), (1, 2)];
        let strict = build_graph(s.clone(), Validation::Strict);
        assert!(matches!(
            strict,
            Err(GraphError::Constraint(Violation::NotAClique { .. }))
        ));
        let g = build_graph(s, Validation::Close).unwrap();
        assert_eq!(g.inter_edge_count(), 3);
        assert!(g.has_inter_edge(0, 2));
    }

    #[test]
    fn strict_rejects_two_couplings_to_one_layer() {
        let mut s = spec(&["a", "b"], &[(0, "1"), (1, "1"), (1, "2")]);
        s.inter_edges = vec![(0, 1), (0, 2)];
        let err = build_graph(s.clone(), Validation::Strict).unwrap_err();
        assert!(matches!(
            err,
            GraphError::Constraint(Violation::MultipleInterNeighbors {
                replica: 0,
                layer: LayerId(1)
            })
        ));
        // closing would put an inter edge inside layer b
        assert!(build_graph(s.clone(), Validation::Close).is_err());
        let (g, report) = build_graph_with_report(s, Validation::Warn).unwrap();
        assert_eq!(g.inter_edge_count(), 2);
        assert!(!report.is_empty());
    }

    #[test]
    fn structural_errors() {
        let base = spec(&["a", "b"], &[(0, "1"), (0, "2"), (1, "1")]);
        let mut s = base.clone();
        s.intra_edges = vec![(0, 7)];
        assert_eq!(
            build_graph(s, Validation::Strict).unwrap_err(),
            GraphError::DanglingReplica(7)
        );
        let mut s = base.clone();
        s.intra_edges = vec![(0, 0)];
        assert!(matches!(
            build_graph(s, Validation::Strict),
            Err(GraphError::SelfLoop(_))
        ));
        let mut s = base.clone();
        s.intra_edges = vec![(0, 1), (1, 0)];
        assert!(matches!(
            build_graph(s, Validation::Strict),
            Err(GraphError::DuplicateEdge(0, 1))
        ));
        let mut s = base.clone();
        s.intra_edges = vec![(0, 2)];
        assert!(matches!(
            build_graph(s, Validation::Strict),
            Err(GraphError::IntraAcrossLayers(..))
        ));
        let mut s = base.clone();
        s.inter_edges = vec![(0, 1)];
        assert!(matches!(
            build_graph(s, Validation::Strict),
            Err(GraphError::InterWithinLayer(..))
        ));
        let mut s = base;
        s.replicas.push((LayerId(0), "1".into()));
        assert!(matches!(
            build_graph(s, Validation::Strict),
            Err(GraphError::DuplicateReplica { .. })
        ));
        assert_eq!(
            build_graph(GraphSpec::default(), Validation::Strict).unwrap_err(),
            GraphError::NoLayers
        );
    }

    #[test]
    fn neighborhoods() {
        let g = two_by_two();
        assert_eq!(g.intra_neighbors(0), &[1]);
        assert_eq!(g.inter_neighbors(0), &[2]);
        assert_eq!(g.flattened().neighbors(0), vec![1, 2]);

        let mut s = spec(&["a"], &[(0, "1"), (0, "2"), (0, "3")]);
        s.intra_edges = vec![(0, 1)];
        let g = build_graph(s, Validation::Strict).unwrap();
        assert!(g.intra_neighbors(2).is_empty());
        assert!(g.inter_neighbors(2).is_empty());
    }

    #[test]
    fn lcc_picks_largest() {
        // path of 5 and path of 3 on one layer
        let g = Graph::from_edges(8, &[(0, 1), (1, 2), (2, 3), (3, 4), (5, 6), (6, 7)]).unwrap();
        let m = MultiplexGraph::from_single_layer(&g, "l");
        let lcc = m.largest_connected_component();
        assert_eq!(lcc.node_count(), 5);
        assert_eq!(lcc.intra_edge_count(), 4);
        assert_eq!(lcc.largest_connected_component(), lcc);
    }

    #[test]
    fn lcc_tie_prefers_smallest_index() {
        let g = Graph::from_edges(6, &[(3, 4), (4, 5), (0, 1), (1, 2)]).unwrap();
        let m = MultiplexGraph::from_single_layer(&g, "l");
        let lcc = m.largest_connected_component();
        let labels: Vec<&str> = lcc.replicas().iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, vec!["0", "1", "2"]);
    }

    #[test]
    fn lcc_drops_emptied_layers() {
        let mut s = spec(
            &["a", "b", "c"],
            &[(0, "1"), (0, "2"), (1, "1"), (1, "2"), (2, "9"), (2, "8")],
        );
        s.intra_edges = vec![(0, 1), (2, 3), (4, 5)];
        s.inter_edges = vec![(0, 2)];
        let g = build_graph(s, Validation::Strict)
            .unwrap()
            .largest_connected_component();
        assert_eq!(g.layer_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(g.node_count(), 4);
    }

    #[test]
    fn layer_subnetwork_cases() {
        let g = two_by_two();
        let all = g.layer_subnetwork(&[LayerId(0), LayerId(1)]).unwrap();
        assert_eq!(all, g);
        let b = g.layer_subnetwork(&[LayerId(1)]).unwrap();
        assert_eq!(b.layer_names(), &["b".to_string()]);
        assert_eq!(b.node_count(), 2);
        assert_eq!(b.inter_edge_count(), 0);
        assert_eq!(b.intra_edge_count(), 1);
        assert_eq!(b.replica(0).layer, LayerId(0));
        assert_eq!(
            g.layer_subnetwork(&[]).unwrap_err(),
            GraphError::EmptyLayerSubset
        );
    }

    #[test]
    fn flattened_view_union() {
        let g = two_by_two();
        let f = g.flattened();
        assert_eq!(f.edge_count(), 4);
        assert_eq!(f.edges(), vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(f.to_graph().edge_count(), 4);
    }

    #[test]
    fn simple_graph_rejects_duplicates() {
        assert!(Graph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 0)]).is_err());
        let g = Graph::from_edges_dedup(3, &[(0, 1), (1, 0), (2, 2)]);
        assert_eq!(g.edge_count(), 1);
    }
}
