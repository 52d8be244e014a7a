//! Per-node orbit counts over the connected graphlets on 2 to 4 nodes.
//!
//! | orbit | graphlet | node position            |
//! |-------|----------|--------------------------|
//! | 0     | edge     | either end               |
//! | 1, 2  | path P3  | end, middle              |
//! | 3     | triangle | any                      |
//! | 4, 5  | path P4  | end, inner               |
//! | 6, 7  | star K13 | leaf, center             |
//! | 8     | cycle C4 | any                      |
//! | 9-11  | paw      | pendant, degree 2, degree 3 |
//! | 12, 13| diamond  | degree 2, degree 3       |
//! | 14    | K4       | any                      |

use crate::graph::Graph;

pub const NUM_ORBITS: usize = 15;

/// Mean over nodes of the per-node orbit counts.
pub type OrbitVector = [f64; NUM_ORBITS];

/// Orbit of each node of a connected induced subgraph, given the nodes'
/// degrees inside it and its edge count.
fn classify(size: usize, edges: usize, deg: &[usize]) -> impl Iterator<Item = usize> + '_ {
    deg.iter().map(move |&d| match (size, edges, d) {
        (2, 1, _) => 0,
        (3, 2, 1) => 1,
        (3, 2, 2) => 2,
        (3, 3, _) => 3,
        (4, 3, 1) if deg.contains(&3) => 6,
        (4, 3, 3) => 7,
        (4, 3, 1) => 4,
        (4, 3, 2) => 5,
        (4, 4, 2) if !deg.contains(&3) => 8,
        (4, 4, 1) => 9,
        (4, 4, 2) => 10,
        (4, 4, 3) => 11,
        (4, 5, 2) => 12,
        (4, 5, 3) => 13,
        (4, 6, _) => 14,
        _ => unreachable!("disconnected or malformed graphlet ({size} nodes, {edges} edges, degree {d})"),
    })
}

fn record(g: &Graph, nodes: &[usize], counts: &mut [[u64; NUM_ORBITS]]) {
    let mut deg = [0usize; 4];
    let mut edges = 0;
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            if g.has_edge(nodes[a], nodes[b]) {
                deg[a] += 1;
                deg[b] += 1;
                edges += 1;
            }
        }
    }
    let deg = &deg[..nodes.len()];
    for (&v, orbit) in nodes.iter().zip(classify(nodes.len(), edges, deg)) {
        counts[v][orbit] += 1;
    }
}

/// Enumerates every connected induced subgraph with 2 to 4 nodes exactly once
/// (ESU: each subgraph is grown from its smallest node, extending only through
/// larger nodes that are exclusive neighbors of the newest member).
fn extend(g: &Graph, root: usize, sub: &mut Vec<usize>, ext: Vec<usize>, counts: &mut [[u64; NUM_ORBITS]]) {
    if sub.len() >= 2 {
        record(g, sub, counts);
    }
    if sub.len() == 4 {
        return;
    }
    let mut ext = ext;
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        for &u in g.neighbors(w) {
            let exclusive = u > root
                && !sub.contains(&u)
                && !ext.contains(&u)
                && u != w
                && sub.iter().all(|&s| !g.has_edge(s, u));
            if exclusive && !next.contains(&u) {
                next.push(u);
            }
        }
        sub.push(w);
        extend(g, root, sub, next, counts);
        sub.pop();
    }
}

/// Exact per-node orbit counts.
pub fn node_orbit_counts(g: &Graph) -> Vec<[u64; NUM_ORBITS]> {
    let mut counts = vec![[0u64; NUM_ORBITS]; g.n()];
    let mut sub = Vec::with_capacity(4);
    for v in 0..g.n() {
        let ext: Vec<usize> = g.neighbors(v).iter().copied().filter(|&u| u > v).collect();
        sub.push(v);
        extend(g, v, &mut sub, ext, &mut counts);
        sub.pop();
    }
    counts
}

pub fn orbit_counts(g: &Graph) -> OrbitVector {
    let mut out = [0.0; NUM_ORBITS];
    for c in node_orbit_counts(g) {
        for (o, &x) in out.iter_mut().zip(&c) {
            *o += x as f64;
        }
    }
    out.iter_mut().for_each(|o| *o /= g.n() as f64);
    out
}
