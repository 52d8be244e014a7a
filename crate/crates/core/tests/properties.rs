mod common;

use common::{random_histogram, random_small_graph};
use graphrnn::eval::{mmd_squared, wasserstein1};
use graphrnn::graph::{bfs_order, verify_parent_frontier_property, NodeOrdering};
use graphrnn::nn::bce_loss;
use graphrnn::sequence::{decode, encode, row_spans};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph_and_bfs(seed: u64) -> (graphrnn::Graph, graphrnn::BfsResult) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_small_graph(&mut rng);
    let perm = NodeOrdering::random(g.n(), &mut rng);
    let bfs = bfs_order(&g, &perm);
    (g, bfs)
}

/// BFS layer of every node (distance from its component's root), indexed by
/// position in the order, computed independently of `bfs_order`.
fn layers_by_position(g: &graphrnn::Graph, order: &NodeOrdering) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.n()];
    let mut out = Vec::with_capacity(g.n());
    for &v in order.as_slice() {
        if dist[v] == usize::MAX {
            // root of a new component: distances by plain BFS from it
            dist[v] = 0;
            let mut queue = std::collections::VecDeque::from([v]);
            while let Some(u) = queue.pop_front() {
                for &w in g.neighbors(u) {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        out.push(dist[v]);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn roundtrip_with_full_width(seed in any::<u64>()) {
        let (g, bfs) = graph_and_bfs(seed);
        let m = (g.n() - 1).max(1);
        let enc = encode(&g, &bfs.order, m).unwrap();
        prop_assert!(enc.is_lossless());
        prop_assert_eq!(decode(&enc.seq), g.relabel(&bfs.order));
    }

    #[test]
    fn bfs_orders_satisfy_parent_frontier_property(seed in any::<u64>()) {
        let (g, bfs) = graph_and_bfs(seed);
        prop_assert!(verify_parent_frontier_property(&g, &bfs.order));
        prop_assert!(bfs.frontier_width <= g.n());
    }

    #[test]
    fn spans_bounded_by_frontier(seed in any::<u64>()) {
        let (g, bfs) = graph_and_bfs(seed);
        let spans = row_spans(&g, &bfs.order);
        for &s in &spans {
            prop_assert!(s <= 2 * bfs.frontier_width);
        }
        // exact layer bound: a node's earliest neighbor sits in the previous
        // layer, so the span is below the two layers' combined size
        let layer = layers_by_position(&g, &bfs.order);
        let mut size = std::collections::HashMap::new();
        let mut comp = 0;
        for (pos, &l) in layer.iter().enumerate() {
            if l == 0 && pos > 0 { comp += 1; }
            *size.entry((comp, l)).or_insert(0usize) += 1;
        }
        let mut comp = 0;
        for (pos, &l) in layer.iter().enumerate() {
            if l == 0 && pos > 0 { comp += 1; }
            // spans are indexed from the second node
            let span = if pos == 0 { 0 } else { spans[pos - 1] };
            if span > 0 {
                let bound = size[&(comp, l)] + size[&(comp, l - 1)] - 1;
                prop_assert!(span <= bound, "span {} > {}", span, bound);
            }
        }
    }

    #[test]
    fn wider_truncation_keeps_more_edges(seed in any::<u64>(), m in 1usize..10) {
        let (g, bfs) = graph_and_bfs(seed);
        let narrow = decode(&encode(&g, &bfs.order, m).unwrap().seq);
        let wide = decode(&encode(&g, &bfs.order, m + 1).unwrap().seq);
        for (i, j) in narrow.edges() {
            prop_assert!(wide.has_edge(i, j));
        }
    }

    #[test]
    fn w1_is_a_metric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, q, r) = (random_histogram(&mut rng, 6), random_histogram(&mut rng, 6), random_histogram(&mut rng, 6));
        prop_assert_eq!(wasserstein1(&p, &p), 0.0);
        prop_assert!((wasserstein1(&p, &q) - wasserstein1(&q, &p)).abs() < 1e-12);
        prop_assert!(wasserstein1(&p, &r) <= wasserstein1(&p, &q) + wasserstein1(&q, &r) + 1e-12);
    }

    #[test]
    fn mmd_is_nonnegative_and_symmetric(a in prop::collection::vec(-5.0f64..5.0, 1..8), b in prop::collection::vec(-5.0f64..5.0, 1..8)) {
        let k = |x: &f64, y: &f64| (-(x - y) * (x - y) / 2.0).exp();
        let ab = mmd_squared(&a, &b, k).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - mmd_squared(&b, &a, k).unwrap()).abs() < 1e-12);
        prop_assert!(mmd_squared(&a, &a, k).unwrap() < 1e-12);
    }

    #[test]
    fn bce_is_nonnegative(pred in prop::collection::vec(0.0f64..=1.0, 1..6), bits in prop::collection::vec(any::<bool>(), 6)) {
        let t: Vec<f64> = bits[..pred.len()].iter().map(|&b| b as u8 as f64).collect();
        let mask = vec![1.0; pred.len()];
        prop_assert!(bce_loss(&pred, &t, &mask).unwrap() >= 0.0);
    }
}
