//! Independent oracles shared by the integration and acceptance tests.

#![allow(dead_code)]

use graphrnn::datasets::{gen_ba, gen_community2, gen_community4, gen_er, gen_grid, gen_ladder};
use graphrnn::eval::{Histogram, NUM_ORBITS};
use graphrnn::Graph;
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use rand::Rng;

/// Earth mover's distance as a transportation linear program.
pub fn lp_w1(p: &Histogram, q: &Histogram) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let (ps, qs) = (p.support(), q.support());
    let vars: Vec<Vec<_>> =
        ps.iter().map(|&x| qs.iter().map(|&y| lp.add_var((x - y).abs(), (0.0, f64::INFINITY))).collect()).collect();
    for (i, &m) in p.mass().iter().enumerate() {
        let row: Vec<_> = vars[i].iter().map(|&v| (v, 1.0)).collect();
        lp.add_constraint(&row[..], ComparisonOp::Eq, m);
    }
    for (j, &m) in q.mass().iter().enumerate() {
        let col: Vec<_> = vars.iter().map(|r| (r[j], 1.0)).collect();
        lp.add_constraint(&col[..], ComparisonOp::Eq, m);
    }
    lp.solve().expect("transport LP is feasible").objective()
}

/// Up to `max_points` random support points on a small integer/half grid.
pub fn random_histogram<R: Rng>(rng: &mut R, max_points: usize) -> Histogram {
    let k = rng.gen_range(1..=max_points);
    let pairs = (0..k).map(|_| (rng.gen_range(0..20) as f64 * 0.5, rng.gen_range(0.05..1.0))).collect();
    Histogram::from_weights(pairs).unwrap()
}

pub fn min_eigenvalue(gram: &[Vec<f64>]) -> f64 {
    let n = gram.len();
    let m = DMatrix::from_fn(n, n, |i, j| gram[i][j]);
    m.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Template graphlets on 2 to 4 nodes with the orbit of each position.
fn templates() -> Vec<(usize, Vec<(usize, usize)>, Vec<usize>)> {
    vec![
        (2, vec![(0, 1)], vec![0, 0]),
        (3, vec![(0, 1), (1, 2)], vec![1, 2, 1]),
        (3, vec![(0, 1), (1, 2), (0, 2)], vec![3, 3, 3]),
        (4, vec![(0, 1), (1, 2), (2, 3)], vec![4, 5, 5, 4]),
        (4, vec![(0, 1), (0, 2), (0, 3)], vec![7, 6, 6, 6]),
        (4, vec![(0, 1), (1, 2), (2, 3), (3, 0)], vec![8, 8, 8, 8]),
        (4, vec![(0, 1), (1, 2), (2, 0), (2, 3)], vec![10, 10, 11, 9]),
        (4, vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)], vec![13, 12, 13, 12]),
        (4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], vec![14, 14, 14, 14]),
    ]
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Per-node orbit counts by scanning every 2-, 3- and 4-node subset and
/// matching its induced subgraph against the templates by permutation.
pub fn brute_force_orbits(g: &Graph) -> Vec<[u64; NUM_ORBITS]> {
    let tpl = templates();
    let mut counts = vec![[0u64; NUM_ORBITS]; g.n()];
    for k in 2..=4 {
        let perms = permutations(k);
        for s in subsets(g.n(), k) {
            'tpl: for (_, edges, orbits) in tpl.iter().filter(|t| t.0 == k) {
                for perm in &perms {
                    // node s[a] plays template position perm[a]
                    let ok = (0..k).all(|a| {
                        (a + 1..k).all(|b| {
                            let (x, y) = (perm[a].min(perm[b]), perm[a].max(perm[b]));
                            let in_tpl = edges.iter().any(|&(u, v)| (u.min(v), u.max(v)) == (x, y));
                            g.has_edge(s[a], s[b]) == in_tpl
                        })
                    });
                    if ok {
                        for a in 0..k {
                            counts[s[a]][orbits[perm[a]]] += 1;
                        }
                        break 'tpl;
                    }
                }
            }
        }
    }
    counts
}

/// Random graph of a randomly chosen kind with at most 64 nodes.
pub fn random_small_graph<R: Rng>(rng: &mut R) -> Graph {
    match rng.gen_range(0..6) {
        0 => gen_er(rng.gen_range(2..=40), rng.gen_range(0.05..0.5), rng),
        1 => {
            let m = rng.gen_range(1..=4);
            gen_ba(rng.gen_range(m + 1..=64), m, rng)
        }
        2 => gen_community2(rng.gen_range(12..=40), 0.7, 0.05, rng),
        3 => gen_community4(rng.gen_range(16..=40), rng),
        4 => gen_grid(rng.gen_range(1..=8), rng.gen_range(2..=8)),
        _ => gen_ladder(rng.gen_range(2..=30)),
    }
    .unwrap()
}
