//! Undirected simple graphs, node orderings and the seeded BFS that produces
//! canonical orderings.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Undirected simple graph on nodes `0..n`.
///
/// Neighbor lists are kept sorted so traversal order only depends on the
/// caller-supplied ordering, never on insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Graph with `n` isolated nodes.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph must have at least one node".into()));
        }
        Ok(Self { adj: vec![Vec::new(); n], edge_count: 0 })
    }

    /// Builds a graph from an edge list. Self-loops, duplicates and out-of-range
    /// endpoints are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for &(i, j) in edges {
            if !g.add_edge(i, j)? {
                return Err(Error::InvalidGraph(format!("duplicate edge ({i}, {j})")));
            }
        }
        Ok(g)
    }

    /// Inserts `{i, j}`. Returns `Ok(false)` when the edge was already present.
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<bool> {
        let n = self.n();
        if i >= n || j >= n {
            return Err(Error::InvalidGraph(format!("edge ({i}, {j}) out of range for n = {n}")));
        }
        if i == j {
            return Err(Error::InvalidGraph(format!("self-loop on node {i}")));
        }
        match self.adj[i].binary_search(&j) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.adj[i].insert(pos, j);
                let pos_j = self.adj[j].binary_search(&i).unwrap_err();
                self.adj[j].insert(pos_j, i);
                self.edge_count += 1;
                Ok(true)
            }
        }
    }

    /// Removes `{i, j}`. Returns whether it was present.
    pub fn remove_edge(&mut self, i: usize, j: usize) -> bool {
        if i >= self.n() || j >= self.n() {
            return false;
        }
        match self.adj[i].binary_search(&j) {
            Ok(pos) => {
                self.adj[i].remove(pos);
                let pos_j = self.adj[j].binary_search(&i).expect("adjacency is symmetric");
                self.adj[j].remove(pos_j);
                self.edge_count -= 1;
                true
            }
            Err(_) => false,
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n() && self.adj[i].binary_search(&j).is_ok()
    }

    /// Edges as `(i, j)` pairs with `i < j`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (i, nbrs) in self.adj.iter().enumerate() {
            out.extend(nbrs.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    /// The graph whose node `k` is node `order[k]` of `self`.
    pub fn relabel(&self, order: &NodeOrdering) -> Graph {
        let pos = order.positions();
        let mut adj = vec![Vec::new(); self.n()];
        for (k, &v) in order.as_slice().iter().enumerate() {
            let mut nbrs: Vec<usize> = self.adj[v].iter().map(|&u| pos[u]).collect();
            nbrs.sort_unstable();
            adj[k] = nbrs;
        }
        Graph { adj, edge_count: self.edge_count }
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n()];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &self.adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.n()
    }
}

/// A permutation of `0..n`; position `k` holds the node visited `k`-th.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeOrdering(Vec<usize>);

impl NodeOrdering {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &v in &perm {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidOrdering(format!("{perm:?} is not a permutation of 0..{n}")));
            }
        }
        Ok(Self(perm))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        Self(perm)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Inverse permutation: `positions()[v]` is the rank of node `v`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (k, &v) in self.0.iter().enumerate() {
            pos[v] = k;
        }
        pos
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfsResult {
    pub order: NodeOrdering,
    /// Largest BFS layer over all components.
    pub frontier_width: usize,
}

/// Breadth-first ordering seeded by `seed_perm`.
///
/// Traversal starts at `seed_perm[0]`; the unvisited neighbors of each dequeued
/// node are enqueued in their `seed_perm` rank order. When a component is
/// exhausted the earliest unvisited node in `seed_perm` starts the next one.
pub fn bfs_order(g: &Graph, seed_perm: &NodeOrdering) -> BfsResult {
    let n = g.n();
    debug_assert_eq!(seed_perm.len(), n);
    let rank = seed_perm.positions();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut layer = vec![0usize; n];
    let mut frontier_width = 0;
    let mut queue = VecDeque::with_capacity(n);
    let mut scratch = Vec::new();

    for &root in seed_perm.as_slice() {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        layer[root] = 0;
        queue.push_back(root);
        let mut layer_sizes = vec![0usize];
        while let Some(v) = queue.pop_front() {
            order.push(v);
            layer_sizes[layer[v]] += 1;
            scratch.clear();
            scratch.extend(g.neighbors(v).iter().copied().filter(|&u| !visited[u]));
            scratch.sort_unstable_by_key(|&u| rank[u]);
            for &u in &scratch {
                visited[u] = true;
                layer[u] = layer[v] + 1;
                if layer_sizes.len() <= layer[u] {
                    layer_sizes.push(0);
                }
                queue.push_back(u);
            }
        }
        frontier_width = frontier_width.max(layer_sizes.into_iter().max().unwrap_or(0));
    }

    BfsResult { order: NodeOrdering(order), frontier_width }
}

/// Checks the frontier property of BFS orderings: whenever `v_i` is adjacent to
/// `v_{j-1}` but not to `v_j` (`i < j`), no edge joins a node at or before `i`
/// to a node at or after `j`.
pub fn verify_frontier_property(g: &Graph, order: &NodeOrdering) -> bool {
    let relabeled = g.relabel(order);
    let n = relabeled.n();
    // max_partner[i'] = largest neighbor index of i'; prefix max over i' <= i
    let mut prefix_max = vec![0usize; n];
    let mut running = 0;
    for (i, slot) in prefix_max.iter_mut().enumerate() {
        if let Some(&last) = relabeled.neighbors(i).last() {
            running = running.max(last);
        }
        *slot = running;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if j >= 1 && j - 1 != i && relabeled.has_edge(i, j - 1) && !relabeled.has_edge(i, j) {
                // some i' <= i adjacent to some j' >= j
                if prefix_max[i] >= j {
                    return false;
                }
            }
        }
    }
    true
}

/// The frontier property restricted to tree edges: whenever `v_i` is the
/// BFS parent (earliest-ordered neighbor) of `v_{j-1}` and not adjacent to
/// `v_j`, no edge joins a node at or before `i` to a node at or after `j`.
///
/// Unlike [`verify_frontier_property`], this holds for every BFS ordering.
pub fn verify_parent_frontier_property(g: &Graph, order: &NodeOrdering) -> bool {
    let relabeled = g.relabel(order);
    let n = relabeled.n();
    // earliest[k] = smallest neighbor index below k
    let earliest: Vec<Option<usize>> =
        (0..n).map(|k| relabeled.neighbors(k).first().copied().filter(|&u| u < k)).collect();
    // suffix_min[j] = smallest earlier-neighbor index over nodes j..n
    let mut suffix_min = vec![usize::MAX; n + 1];
    for k in (0..n).rev() {
        suffix_min[k] = suffix_min[k + 1].min(earliest[k].unwrap_or(usize::MAX));
    }
    (2..n).all(|j| match earliest[j - 1] {
        Some(i) if !relabeled.has_edge(i, j) => suffix_min[j] > i,
        _ => true,
    })
}
