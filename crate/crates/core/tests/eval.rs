mod common;

use common::*;
use multisage::embed::EmbeddingTable;
use multisage::eval::{
    aggregate_runs, delta, delta_value, evaluate, layer_order_by_size, make_split,
    mann_whitney_auc, read_split, roc_auc, write_split, EvalError, EvalSplit, NegCap, SplitConfig,
};
use multisage::graph::{build_graph, GraphSpec, LayerId, MultiplexGraph, Validation};
use ndarray::Array2;
use rand::Rng;

/// 10 replicas on two layers, 8 intra links, 4 couplings.
fn ten_replica_toy() -> MultiplexGraph {
    let spec = GraphSpec {
        layers: vec!["a".into(), "b".into()],
        replicas: (0..6)
            .map(|i| (LayerId(0), i.to_string()))
            .chain((0..4).map(|i| (LayerId(1), i.to_string())))
            .collect(),
        intra_edges: vec![
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 5),
            (6, 7),
            (7, 8),
            (8, 9),
        ],
        inter_edges: vec![(0, 6), (1, 7), (2, 8), (3, 9)],
    };
    build_graph(spec, Validation::Strict).unwrap()
}

fn round_share(f: f64, total: usize) -> usize {
    if total == 0 {
        0
    } else {
        ((f * total as f64).round() as usize).max(1).min(total)
    }
}

#[test]
fn split_counts_match_enumeration() {
    let g = ten_replica_toy();
    for seed in 0..20 {
        let cfg = SplitConfig {
            seed,
            ..Default::default()
        };
        let s = make_split(&g, &cfg).unwrap();
        assert_eq!(s.marked_nodes.len(), 2);
        let m = |u: usize| s.marked_nodes.contains(&u);
        let n = g.node_count();
        let (mut intra_cand, mut inter_cand, mut intra_pool, mut inter_pool) = (0, 0, 0, 0);
        for u in 0..n {
            for v in u + 1..n {
                let same = g.layer_of(u) == g.layer_of(v);
                let edge = g.has_edge(u, v);
                if edge && (m(u) || m(v)) {
                    if same {
                        intra_cand += 1;
                    } else {
                        inter_cand += 1;
                    }
                }
                if !edge && m(u) && m(v) {
                    if same {
                        intra_pool += 1;
                    } else {
                        inter_pool += 1;
                    }
                }
            }
        }
        let test_intra = round_share(0.2, intra_cand);
        assert_eq!(s.test_pos_intra.len(), test_intra);
        assert_eq!(s.test_pos_inter.len(), inter_cand);
        assert_eq!(
            s.test_neg_intra.len(),
            round_share(0.2, intra_pool).min(10 * test_intra)
        );
        assert_eq!(s.test_neg_inter.len(), inter_pool.min(10 * inter_cand));
        assert_eq!(s.train_pos_intra.len() + s.test_pos_intra.len(), 8);
        assert_eq!(s.train_pos_inter.len() + s.test_pos_inter.len(), 4);
        assert_eq!(
            s.train_neg.len(),
            12 - s.test_pos_intra.len() - s.test_pos_inter.len()
        );
        s.validate(&g).unwrap();
    }
}

#[test]
fn split_is_reproducible_and_seed_dependent() {
    let g = random_multiplex(1, 3, 40, 0.8, 0.15, 0.7);
    let cfg = SplitConfig {
        seed: 9,
        ..Default::default()
    };
    assert_eq!(make_split(&g, &cfg).unwrap(), make_split(&g, &cfg).unwrap());
    let other = make_split(
        &g,
        &SplitConfig {
            seed: 10,
            ..Default::default()
        },
    )
    .unwrap();
    assert_ne!(
        make_split(&g, &cfg).unwrap().marked_nodes,
        other.marked_nodes
    );
}

#[test]
fn both_endpoints_switch_restricts_intra_positives() {
    let g = random_multiplex(2, 2, 60, 0.9, 0.2, 0.5);
    let cfg = SplitConfig {
        both_endpoints_marked: true,
        seed: 4,
        ..Default::default()
    };
    let s = make_split(&g, &cfg).unwrap();
    for &(u, v) in &s.test_pos_intra {
        assert!(s.marked_nodes.contains(&u) && s.marked_nodes.contains(&v));
    }
    s.validate(&g).unwrap();
}

#[test]
fn graph_without_inter_links_has_no_inter_auc() {
    let g = random_multiplex(3, 1, 50, 1.0, 0.2, 0.0);
    let s = make_split(&g, &SplitConfig::default()).unwrap();
    assert!(s.test_pos_inter.is_empty() && s.test_neg_inter.is_empty());
    let z = EmbeddingTable(Array2::from_shape_fn((g.node_count(), 3), |(i, j)| {
        ((i * 7 + j) % 5) as f64
    }));
    let e = evaluate(&z, &s).unwrap();
    assert!(e.auc_inter.is_none() && e.auc_intra.is_some());
}

#[test]
fn split_rejects_bad_parameters() {
    let g = ten_replica_toy();
    for f in [0.0, 1.0, -0.1, f64::NAN] {
        let cfg = SplitConfig {
            marked_fraction: f,
            ..Default::default()
        };
        assert!(matches!(
            make_split(&g, &cfg),
            Err(EvalError::InvalidParameter(_))
        ));
    }
    let cfg = SplitConfig {
        marked_fraction: 0.05,
        ..Default::default()
    };
    assert!(matches!(make_split(&g, &cfg), Err(EvalError::TooSmall(_))));
}

#[test]
fn negative_cap_applies() {
    let g = random_multiplex(5, 2, 80, 0.9, 0.05, 0.6);
    let uncapped = make_split(
        &g,
        &SplitConfig {
            neg_cap: NegCap::Unlimited,
            ..Default::default()
        },
    )
    .unwrap();
    let capped = make_split(
        &g,
        &SplitConfig {
            neg_cap: NegCap::Absolute { count: 3 },
            ..Default::default()
        },
    )
    .unwrap();
    assert!(uncapped.test_neg_inter.len() > 3);
    assert_eq!(capped.test_neg_inter.len(), 3);
    assert_eq!(capped.test_neg_intra.len(), 3);
}

#[test]
fn rejection_sampling_path_keeps_invariants() {
    // large enough that the train negatives pool is not enumerated
    let g = random_multiplex(6, 2, 1200, 1.0, 0.002, 0.5);
    let s = make_split(&g, &SplitConfig::default()).unwrap();
    s.validate(&g).unwrap();
    assert_eq!(s.train_neg.len(), s.training_edges().len());
}

#[test]
fn auc_examples() {
    assert_eq!(mann_whitney_auc(&[2.0, 3.0], &[0.0, 1.0]).unwrap(), 1.0);
    assert_eq!(roc_auc(&[0.3; 5], &[0.3; 5]).unwrap().auc, 0.5);
    assert!(matches!(
        roc_auc(&[], &[1.0]),
        Err(EvalError::EmptyScores(_))
    ));
}

fn pairwise_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut s = 0.0;
    for p in pos {
        for n in neg {
            s += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    s / (pos.len() * neg.len()) as f64
}

#[test]
fn auc_matches_trapezoid_and_pairwise_count() {
    let mut r = rng(12);
    for case in 0..100 {
        let (np, nn) = (r.random_range(1..250), r.random_range(1..250));
        let levels = if case % 3 == 0 { 4 } else { 1_000_000 };
        let mut draw =
            |shift: i64| (r.random_range(0..levels) as i64 + shift) as f64 / levels as f64;
        let pos: Vec<f64> = (0..np).map(|_| draw(1)).collect();
        let neg: Vec<f64> = (0..nn).map(|_| draw(0)).collect();
        let c = roc_auc(&pos, &neg).unwrap();
        assert!((c.auc - c.trapezoid_area()).abs() < 1e-12);
        assert!((c.auc - pairwise_auc(&pos, &neg)).abs() < 1e-12);
    }
}

#[test]
fn evaluate_matches_hand_enumeration() {
    let g = ten_replica_toy();
    let s = make_split(
        &g,
        &SplitConfig {
            seed: 3,
            ..Default::default()
        },
    )
    .unwrap();
    let z = EmbeddingTable(Array2::from_shape_fn((10, 2), |(i, j)| {
        ((i * 3 + j * 5) % 7) as f64 - 3.0
    }));
    let score = |&(u, v): &(usize, usize)| (0..2).map(|j| z.0[[u, j]] * z.0[[v, j]]).sum::<f64>();
    let e = evaluate(&z, &s).unwrap();
    let side = |pos: &[(usize, usize)], neg: &[(usize, usize)]| {
        (!pos.is_empty() && !neg.is_empty()).then(|| {
            pairwise_auc(
                &pos.iter().map(score).collect::<Vec<_>>(),
                &neg.iter().map(score).collect::<Vec<_>>(),
            )
        })
    };
    assert_eq!(e.auc_intra, side(&s.test_pos_intra, &s.test_neg_intra));
    assert_eq!(e.auc_inter, side(&s.test_pos_inter, &s.test_neg_inter));
}

#[test]
fn evaluate_edge_cases() {
    let g = random_multiplex(7, 2, 40, 0.9, 0.2, 0.8);
    let s = make_split(&g, &SplitConfig::default()).unwrap();
    let n = g.node_count();
    let flat = EmbeddingTable(Array2::ones((n, 4)));
    let e = evaluate(&flat, &s).unwrap();
    assert_eq!((e.auc_intra, e.auc_inter), (Some(0.5), Some(0.5)));

    // planted: test positives share a direction, negatives are orthogonal
    let mut z = Array2::zeros((n, n + 1));
    for i in 0..n {
        z[[i, i]] = 1.0;
    }
    for &(u, v) in s.test_pos_intra.iter().chain(&s.test_pos_inter) {
        z[[u, n]] += 10.0;
        z[[v, n]] += 10.0;
    }
    let planted = EmbeddingTable(z);
    let neg_scores: Vec<f64> = s
        .test_neg_intra
        .iter()
        .chain(&s.test_neg_inter)
        .map(|&(u, v)| planted.score(u, v))
        .collect();
    let pos_scores: Vec<f64> = s
        .test_pos_intra
        .iter()
        .chain(&s.test_pos_inter)
        .map(|&(u, v)| planted.score(u, v))
        .collect();
    if pos_scores.iter().cloned().fold(f64::INFINITY, f64::min)
        > neg_scores.iter().cloned().fold(0.0, f64::max)
    {
        let e = evaluate(&planted, &s).unwrap();
        assert_eq!((e.auc_intra, e.auc_inter), (Some(1.0), Some(1.0)));
    }

    let short = EmbeddingTable(Array2::zeros((2, 4)));
    assert!(matches!(
        evaluate(&short, &s),
        Err(EvalError::MissingEmbedding(_))
    ));
}

fn chain_of_layers(sizes: &[usize], couplings: &[(usize, usize, usize)]) -> MultiplexGraph {
    // couplings: (layer a, layer b, count) couple labels 0..count
    let mut spec = GraphSpec {
        layers: (0..sizes.len()).map(|l| format!("L{l}")).collect(),
        ..Default::default()
    };
    let mut base = Vec::new();
    for (l, &s) in sizes.iter().enumerate() {
        base.push(spec.replicas.len());
        for i in 0..s {
            spec.replicas.push((LayerId(l), i.to_string()));
        }
        for i in 1..s {
            spec.intra_edges.push((base[l] + i - 1, base[l] + i));
        }
    }
    for &(a, b, count) in couplings {
        for i in 0..count {
            spec.inter_edges.push((base[a] + i, base[b] + i));
        }
    }
    build_graph(spec, Validation::Close).unwrap()
}

#[test]
fn delta_examples() {
    let full = chain_of_layers(&[5, 5], &[(0, 1, 5)]);
    let d = delta(&full, &layer_order_by_size(&full)).unwrap();
    assert_eq!(d.points[0].delta, 0.0);

    let none = chain_of_layers(&[5, 4], &[]);
    assert_eq!(
        delta(&none, &layer_order_by_size(&none)).unwrap().points[0].delta,
        1.0
    );

    // sizes 6, 4, 3 on layers 1, 0, 2; couplings: 3 between L0-L1, 2 between L1-L2, 2 between L0-L2
    let g = chain_of_layers(&[4, 6, 3], &[(0, 1, 3), (1, 2, 2), (0, 2, 2)]);
    let order = layer_order_by_size(&g);
    assert_eq!(order, vec![LayerId(1), LayerId(0), LayerId(2)]);
    let d = delta(&g, &order).unwrap();
    assert_eq!(d.points[0].inter_edges, 3);
    assert_eq!(d.points[1].inter_edges, 7);
    assert!((d.points[0].delta - (1.0 - 3.0 / 4.0)).abs() < 1e-15);
    assert!((d.points[1].delta - (1.0 - 7.0 / (4.0 + 2.0 * 3.0))).abs() < 1e-15);
    assert_eq!(d.points[1].layer_sizes, vec![6, 4, 3]);

    assert!(matches!(
        delta(&g, &order[..1]),
        Err(EvalError::LayerOrder(_))
    ));
    assert!(matches!(
        delta(&g, &[LayerId(2), LayerId(1)]),
        Err(EvalError::LayerOrder(_))
    ));
    assert_eq!(delta_value(0, &[3]), 1.0);
}

#[test]
fn aggregate_examples() {
    let s = aggregate_runs(&[0.6, 0.8]).unwrap();
    assert!((s.mean - 0.7).abs() < 1e-15 && (s.std - 0.141_421_356_237_309_5).abs() < 1e-12);
    // 20 runs against a two-pass textbook computation
    let mut r = rng(1);
    let v: Vec<f64> = (0..20).map(|_| r.random_range(0.4..0.9)).collect();
    let mean = v.iter().sum::<f64>() / 20.0;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 19.0;
    let s = aggregate_runs(&v).unwrap();
    assert!((s.mean - mean).abs() < 1e-14 && (s.std - var.sqrt()).abs() < 1e-14);
    assert_eq!(s.runs, 20);
}

#[test]
fn split_file_round_trip() {
    let g = random_multiplex(8, 3, 30, 0.8, 0.2, 0.7);
    let s = make_split(
        &g,
        &SplitConfig {
            seed: 77,
            ..Default::default()
        },
    )
    .unwrap();
    let mut buf = Vec::new();
    write_split(&mut buf, &s, &g).unwrap();
    let back: EvalSplit = read_split(&buf[..], &g).unwrap();
    assert_eq!(back, s);

    let text = String::from_utf8(buf).unwrap();
    let tampered = text.replacen(" 1\n", " 0\n", 1);
    assert!(matches!(
        read_split(tampered.as_bytes(), &g),
        Err(EvalError::SplitFile { .. })
    ));
    let other = random_multiplex(9, 2, 10, 0.8, 0.2, 0.7);
    assert!(read_split(text.as_bytes(), &other).is_err());
}
