mod common;

use std::collections::{BTreeSet, HashMap};

use dlhwbench::cost::{model_cost, Precision};
use dlhwbench::graph::{deserialize, infer_shapes, serialize, topological_order, validate_graph, ModelGraph};
use dlhwbench::zoo::{benchmark_suite, build_vgg16_scaled, FULL_HD, VGG_ALPHA};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn suite_round_trips_and_shapes_everything() {
    for e in benchmark_suite() {
        let parsed = deserialize(&serialize(&e.graph)).unwrap();
        assert!(parsed.warnings.is_empty());
        assert_eq!(parsed.graph, e.graph, "{}", e.name());
        assert!(validate_graph(&e.graph).is_empty(), "{}", e.name());
        let shapes = infer_shapes(&e.graph).unwrap();
        assert_eq!(shapes.len(), e.graph.nodes.len());
    }
}

#[test]
fn builders_are_deterministic() {
    let a: Vec<String> = benchmark_suite().iter().map(|e| e.graph.content_hash().unwrap()).collect();
    let b: Vec<String> = benchmark_suite().iter().map(|e| e.graph.content_hash().unwrap()).collect();
    assert_eq!(a, b);
    let unique: BTreeSet<_> = a.iter().collect();
    assert_eq!(unique.len(), 7);
}

#[test]
fn heads_share_the_vgg_extractor() {
    let suite = benchmark_suite();
    let vgg = &suite[0].graph;
    let all: BTreeSet<String> = vgg.nodes.iter().map(|n| n.id.clone()).collect();
    let want = vgg.topology_hash(&all).unwrap();
    for head in &suite[4..] {
        assert_eq!(head.graph.topology_hash(&all).unwrap(), want, "{}", head.name());
    }
}

#[test]
fn alpha_scaling_law() {
    let input = FULL_HD;
    let full = model_cost(&build_vgg16_scaled(1.0, input, "conv5_3").unwrap(), Precision::default()).unwrap();
    for alpha in [0.125, 0.25, 0.5, 0.75, 1.0] {
        let g = build_vgg16_scaled(alpha, input, "conv5_3").unwrap();
        let p = model_cost(&g, Precision::default()).unwrap().total_params as f64;
        let ratio = p / full.total_params as f64;
        let a2 = alpha * alpha;
        assert!(ratio >= 0.9 * a2 && ratio <= 1.1 * a2, "alpha {alpha}: ratio {ratio}");
    }
    assert_eq!(VGG_ALPHA, 0.25);
}

fn permuted(g: &ModelGraph, seed: u64) -> ModelGraph {
    let mut p = g.clone();
    p.nodes.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    p
}

fn check_order(g: &ModelGraph, order: &[String]) {
    let pos: HashMap<&str, usize> = order.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    assert_eq!(pos.len(), g.nodes.len());
    for n in &g.nodes {
        for i in &n.inputs {
            assert!(pos[i.as_str()] < pos[n.id.as_str()], "{i} -> {}", n.id);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hash_ignores_declaration_order(seed in any::<u64>(), perm in any::<u64>()) {
        let g = common::random_small_graph(&mut ChaCha8Rng::seed_from_u64(seed), 8);
        prop_assert_eq!(permuted(&g, perm).content_hash().unwrap(), g.content_hash().unwrap());
    }

    #[test]
    fn hash_sees_attribute_changes(seed in any::<u64>()) {
        let g = common::random_small_graph(&mut ChaCha8Rng::seed_from_u64(seed), 8);
        let mut h = g.clone();
        let last = h.nodes.last_mut().unwrap();
        last.attrs.stride = Some(last.attrs.stride.unwrap_or(1) + 1);
        prop_assert_ne!(h.content_hash().unwrap(), g.content_hash().unwrap());
        let mut b = g.clone();
        b.nodes[0].include_bias = !b.nodes[0].include_bias;
        prop_assert_ne!(b.content_hash().unwrap(), g.content_hash().unwrap());
    }

    #[test]
    fn topological_order_respects_edges(seed in any::<u64>(), perm in any::<u64>()) {
        let g = permuted(&common::random_small_graph(&mut ChaCha8Rng::seed_from_u64(seed), 10), perm);
        let order = topological_order(&g).unwrap();
        let mut sorted = order.clone();
        sorted.sort();
        let mut ids: Vec<String> = g.nodes.iter().map(|n| n.id.clone()).collect();
        ids.sort();
        prop_assert_eq!(sorted, ids);
        check_order(&g, &order);
    }

    #[test]
    fn random_graphs_round_trip(seed in any::<u64>()) {
        let g = common::random_small_graph(&mut ChaCha8Rng::seed_from_u64(seed), 8);
        prop_assert_eq!(deserialize(&serialize(&g)).unwrap().graph, g);
    }
}
