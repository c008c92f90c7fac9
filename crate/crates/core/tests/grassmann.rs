mod common;

use std::collections::BTreeSet;

use petgraph::graph6::from_graph6_representation;
use qgeom::graph::{to_edge_csv, to_graph6};
use qgeom::grassmann::{duality_vertex_map, transitivity_witness, GrassmannOptions};
use qgeom::{
    bfs_distance, duality_map, enum_grassmannian, gaussian_binomial, intersection_numbers, GrassmannError, GrassmannGraph,
    Subspace,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

/// `[n]_q`, the q-integer.
fn qint(n: usize, q: usize) -> usize {
    (0..n).map(|i| q.pow(i as u32)).sum()
}

#[test]
fn enumeration_counts_known_values() {
    let cases = [(2, 4, 2, 35), (2, 5, 3, 155), (2, 6, 3, 1395), (3, 4, 2, 130)];
    for (q, n, k, expected) in cases {
        let f = field_by_order(q);
        let list = enum_grassmannian(&f, n, k, 1_000_000).unwrap();
        assert_eq!(list.len(), expected, "G_{k}(GF({q})^{n})");
        let distinct: BTreeSet<&Subspace> = list.iter().collect();
        assert_eq!(distinct.len(), expected);
        assert!(list.windows(2).all(|w| w[0] < w[1]), "canonical order");
        assert!(list.iter().all(|s| s.dim() == k && s.ambient_dim() == n));
    }
}

#[test]
fn enumeration_agrees_with_vector_sets() {
    // every 2-space of GF(3)^3 as a set of vectors, found by brute force
    let f = gf(3);
    let vectors = all_vectors(3, 3);
    let mut oracle = BTreeSet::new();
    for a in &vectors {
        for b in &vectors {
            let span = span_set(&f, 3, &[a.clone(), b.clone()]);
            if span.len() == 9 {
                oracle.insert(span);
            }
        }
    }
    let list = enum_grassmannian(&f, 3, 2, 1000).unwrap();
    let found: BTreeSet<BTreeSet<Vec<u8>>> = list.iter().map(|s| s.vectors(&f).into_iter().collect()).collect();
    assert_eq!(found, oracle);
}

#[test]
fn cap_is_enforced() {
    let f = gf(2);
    match enum_grassmannian(&f, 6, 3, 1000) {
        Err(GrassmannError::TooLarge { count, cap }) => assert_eq!((count, cap), (1395, 1000)),
        other => panic!("expected TooLarge, got {other:?}"),
    }
}

#[test]
fn degenerate_parameters_need_override() {
    let f = gf(2);
    assert!(matches!(GrassmannGraph::new(&f, 4, 1), Err(GrassmannError::DegenerateParameters { .. })));
    let g = GrassmannGraph::with_options(&f, 4, 1, GrassmannOptions { allow_degenerate: true, ..Default::default() })
        .unwrap();
    assert_eq!(g.graph().edge_count(), 15 * 14 / 2);
}

#[test]
fn distances_agree_with_independent_bfs() {
    for (q, n, k) in [(2, 4, 2), (3, 4, 2), (2, 5, 2)] {
        let f = field_by_order(q);
        let g = GrassmannGraph::new(&f, n, k).unwrap();
        let adj: Vec<Vec<usize>> = (0..g.order()).map(|v| g.graph().neighbors(v).to_vec()).collect();
        for a in 0..g.order() {
            let d = bfs(&adj, a);
            for b in 0..g.order() {
                assert_eq!(d[b], Some(g.formula_distance(a, b)));
                assert_eq!(g.graph().cached_distance(a, b) as usize, g.formula_distance(a, b));
            }
        }
        assert_eq!(bfs_distance(g.graph(), 0, g.order() - 1).unwrap(), g.formula_distance(0, g.order() - 1));
    }
}

#[test]
fn intersection_array_matches_closed_form() {
    // Γ_k(GF(q)^n): b_i = q^{2i+1} [k-i] [n-k-i], c_i = [i]^2
    for (q, n, k) in [(2, 4, 2), (2, 5, 2), (3, 4, 2)] {
        let f = field_by_order(q);
        let g = GrassmannGraph::new(&f, n, k).unwrap();
        let numbers = intersection_numbers(g.graph()).unwrap();
        let (b, c) = numbers.intersection_array();
        let d = k.min(n - k);
        let eb: Vec<usize> = (0..d).map(|i| q.pow(2 * i as u32 + 1) * qint(k - i, q) * qint(n - k - i, q)).collect();
        let ec: Vec<usize> = (1..=d).map(|i| qint(i, q).pow(2)).collect();
        assert_eq!((b, c), (eb, ec), "Γ_{k}(GF({q})^{n})");
    }
}

#[test]
fn duality_is_an_adjacency_preserving_involution() {
    let f = gf(2);
    let g = GrassmannGraph::new(&f, 4, 2).unwrap();
    let map = duality_vertex_map(&g, &g).unwrap();
    for a in 0..g.order() {
        assert_eq!(map[map[a]], a);
        assert_eq!(duality_map(&f, &duality_map(&f, &g.vertices()[a])), g.vertices()[a]);
        for b in 0..g.order() {
            assert_eq!(g.graph().is_adjacent(a, b), g.graph().is_adjacent(map[a], map[b]));
        }
    }
    // Γ_2(GF(2)^5) ≅ Γ_3(GF(2)^5)
    let g2 = GrassmannGraph::new(&f, 5, 2).unwrap();
    let g3 = GrassmannGraph::new(&f, 5, 3).unwrap();
    let map = duality_vertex_map(&g2, &g3).unwrap();
    let images: BTreeSet<usize> = map.iter().copied().collect();
    assert_eq!(images.len(), g3.order());
    for (a, b) in g2.graph().edges() {
        assert!(g3.graph().is_adjacent(map[a], map[b]));
    }
}

#[test]
fn linear_group_is_transitive_on_vertices() {
    let f = gf(2);
    let g = GrassmannGraph::new(&f, 5, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let anchor = &g.vertices()[0];
    for _ in 0..10 {
        let target = &g.vertices()[rng.random_range(0..g.order())];
        let m = transitivity_witness(&f, anchor, target).unwrap();
        assert!(m.is_invertible(&f));
        assert_eq!(&anchor.transform(&f, &m, 0), target);
        // the matrix acts as a graph automorphism
        let perm: Vec<usize> = g.vertices().iter().map(|s| g.index_of(&s.transform(&f, &m, 0)).unwrap()).collect();
        for (a, b) in g.graph().edges() {
            assert!(g.graph().is_adjacent(perm[a], perm[b]));
        }
    }
}

#[test]
fn graph6_round_trips_through_petgraph() {
    for (q, n, k) in [(2, 4, 2), (2, 5, 2), (3, 4, 2)] {
        let f = field_by_order(q);
        let g = GrassmannGraph::new(&f, n, k).unwrap();
        let text = to_graph6(g.graph());
        let (order, edges) = from_graph6_representation::<u32>(text);
        assert_eq!(order, g.order());
        let decoded: BTreeSet<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| (a.min(b) as usize, a.max(b) as usize))
            .collect();
        let ours: BTreeSet<(usize, usize)> = g.graph().edges().into_iter().collect();
        assert_eq!(decoded, ours);
    }
}

#[test]
fn graph6_small_known_strings() {
    // reference encodings from the published format description
    let f = gf(2);
    let g = GrassmannGraph::with_options(&f, 2, 1, GrassmannOptions { allow_degenerate: true, ..Default::default() })
        .unwrap();
    // triangle K3
    assert_eq!(to_graph6(g.graph()), "Bw");
    let path = qgeom::FiniteGraph::path(5);
    assert_eq!(to_graph6(&path), "DhC");
}

#[test]
fn csv_lists_each_edge_once() {
    let f = gf(2);
    let g = GrassmannGraph::new(&f, 4, 2).unwrap();
    let csv = to_edge_csv(g.graph());
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("u,v"));
    let rows: Vec<(usize, usize)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), g.graph().edge_count());
    assert!(rows.iter().all(|&(u, v)| u < v && g.graph().is_adjacent(u, v)));
}

#[test]
fn gaussian_binomial_symmetry_and_pascal() {
    for q in [2u64, 3, 4] {
        for n in 1..7usize {
            for k in 0..=n {
                assert_eq!(gaussian_binomial(n, k, q), gaussian_binomial(n, n - k, q));
                if k > 0 && k < n {
                    let pascal = gaussian_binomial(n - 1, k - 1, q) + (q as u128).pow(k as u32) * gaussian_binomial(n - 1, k, q);
                    assert_eq!(gaussian_binomial(n, k, q), pascal);
                }
            }
        }
    }
}

#[test]
fn json_export_lists_vertices_in_order() {
    let f = gf(2);
    let g = GrassmannGraph::new(&f, 4, 2).unwrap();
    let j = g.subspace_graph().to_json();
    let value = serde_json::to_value(&j).unwrap();
    assert_eq!(value["order"], 35);
    assert_eq!(value["ordering_version"], "rref-lex/1");
    assert_eq!(value["vertices"][0]["basis"], serde_json::json!([[0, 0, 1, 0], [0, 0, 0, 1]]));
}
