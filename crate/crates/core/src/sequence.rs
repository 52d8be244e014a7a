//! Graph <-> adjacency-vector sequence mapping with fixed-width truncation.
//!
//! Under an ordering `v_0, ..., v_{n-1}`, row `r` describes node `i = r + 1`:
//! position `k` of the `m_width`-wide row is 1 iff `v_i` is adjacent to
//! `v_{i - m_width + k}`. The rightmost position is therefore the immediately
//! preceding node, and rows for early nodes are zero-padded on the left.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{bfs_order, Graph, NodeOrdering};
use crate::par;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSequence {
    n: usize,
    m_width: usize,
    bits: Vec<u8>,
    order: Option<NodeOrdering>,
}

impl GraphSequence {
    /// Builds a sequence from explicit rows, checking widths and padding.
    pub fn from_rows(n: usize, m_width: usize, rows: &[Vec<u8>]) -> Result<Self> {
        if n == 0 || m_width == 0 {
            return Err(Error::InvalidArgument("n and m_width must be positive".into()));
        }
        if rows.len() != n - 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} rows for {n} nodes, got {}",
                n - 1,
                rows.len()
            )));
        }
        let mut bits = Vec::with_capacity((n - 1) * m_width);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != m_width {
                return Err(Error::InvalidArgument(format!("row {r} has width {} != {m_width}", row.len())));
            }
            let pad = m_width - valid_len(r + 1, m_width);
            for (k, &b) in row.iter().enumerate() {
                if b > 1 || (k < pad && b != 0) {
                    return Err(Error::InvalidArgument(format!("row {r} position {k} holds {b}")));
                }
            }
            bits.extend_from_slice(row);
        }
        Ok(Self { n, m_width, bits, order: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_width(&self) -> usize {
        self.m_width
    }

    pub fn num_rows(&self) -> usize {
        self.n - 1
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.bits[r * self.m_width..(r + 1) * self.m_width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.bits.chunks_exact(self.m_width)
    }

    /// Ordering that produced this sequence, when it came from [`encode`].
    pub fn order(&self) -> Option<&NodeOrdering> {
        self.order.as_ref()
    }
}

/// Number of non-padding positions in the row of ordered node `i` (`i >= 1`).
pub fn valid_len(i: usize, m_width: usize) -> usize {
    i.min(m_width)
}

#[derive(Debug, Clone)]
pub struct Encoded {
    pub seq: GraphSequence,
    /// Edges farther apart than `m_width` in the ordering.
    pub dropped: usize,
}

impl Encoded {
    pub fn is_lossless(&self) -> bool {
        self.dropped == 0
    }
}

/// Encodes `g` under `order` into rows of width `m_width`.
pub fn encode(g: &Graph, order: &NodeOrdering, m_width: usize) -> Result<Encoded> {
    if m_width == 0 {
        return Err(Error::InvalidArgument("m_width must be at least 1".into()));
    }
    if order.len() != g.n() {
        return Err(Error::InvalidOrdering(format!("ordering has {} nodes, graph has {}", order.len(), g.n())));
    }
    let n = g.n();
    let pos = order.positions();
    let mut bits = vec![0u8; (n - 1) * m_width];
    let mut dropped = 0;
    for (i, &v) in order.as_slice().iter().enumerate().skip(1) {
        let row = &mut bits[(i - 1) * m_width..i * m_width];
        for &u in g.neighbors(v) {
            let j = pos[u];
            if j < i {
                let d = i - j;
                if d <= m_width {
                    row[m_width - d] = 1;
                } else {
                    dropped += 1;
                }
            }
        }
    }
    Ok(Encoded { seq: GraphSequence { n, m_width, bits, order: Some(order.clone()) }, dropped })
}

/// Rebuilds the graph (identity labeling) described by a sequence.
pub fn decode(seq: &GraphSequence) -> Graph {
    let m = seq.m_width;
    let mut g = Graph::empty(seq.n).expect("sequence has at least one node");
    for (r, row) in seq.rows().enumerate() {
        let i = r + 1;
        for (k, &b) in row.iter().enumerate() {
            if b == 1 {
                let d = m - k;
                debug_assert!(d <= i);
                g.add_edge(i - d, i).expect("rows describe a simple graph");
            }
        }
    }
    g
}

/// Per-row spans under `order`: distance from node `i` back to its earliest
/// preceding neighbor (0 when it has none). One entry per node `1..n`.
pub fn row_spans(g: &Graph, order: &NodeOrdering) -> Vec<usize> {
    let pos = order.positions();
    order
        .as_slice()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &v)| {
            g.neighbors(v)
                .iter()
                .map(|&u| pos[u])
                .filter(|&j| j < i)
                .min()
                .map_or(0, |j| i - j)
        })
        .collect()
}

const TRIALS_PER_CHUNK: usize = 1000;

/// Estimates the row width needed for BFS sequences of `graphs`.
///
/// Each trial picks a graph uniformly, shuffles its nodes, runs the seeded BFS
/// and records every row span. The `percentile` quantile (nearest rank) of all
/// spans is returned, floored at 1.
pub fn estimate_m<R: Rng + ?Sized>(graphs: &[Graph], trials: usize, percentile: f64, rng: &mut R) -> Result<usize> {
    if graphs.is_empty() {
        return Err(Error::InvalidArgument("estimate_m needs at least one graph".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if !(percentile > 0.0 && percentile <= 1.0) {
        return Err(Error::InvalidArgument(format!("percentile {percentile} outside (0, 1]")));
    }
    let chunks = trials.div_ceil(TRIALS_PER_CHUNK);
    let seeds = par::child_seeds(rng, chunks);
    let per_chunk = par::map_range(chunks, |c| {
        let mut rng = par::rng_from_seed(seeds[c]);
        let count = TRIALS_PER_CHUNK.min(trials - c * TRIALS_PER_CHUNK);
        let mut hist: Vec<u64> = Vec::new();
        for _ in 0..count {
            let g = &graphs[rng.gen_range(0..graphs.len())];
            let seed = NodeOrdering::random(g.n(), &mut rng);
            let bfs = bfs_order(g, &seed);
            for s in row_spans(g, &bfs.order) {
                if hist.len() <= s {
                    hist.resize(s + 1, 0);
                }
                hist[s] += 1;
            }
        }
        hist
    });
    let mut hist: Vec<u64> = Vec::new();
    for h in per_chunk {
        if hist.len() < h.len() {
            hist.resize(h.len(), 0);
        }
        for (a, b) in hist.iter_mut().zip(h) {
            *a += b;
        }
    }
    Ok(quantile_from_histogram(&hist, percentile).max(1))
}

/// Nearest-rank quantile of a histogram over `0..hist.len()`.
fn quantile_from_histogram(hist: &[u64], q: f64) -> usize {
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return 0;
    }
    let rank = ((q * total as f64).ceil() as u64).clamp(1, total);
    let mut acc = 0;
    for (v, &c) in hist.iter().enumerate() {
        acc += c;
        if acc >= rank {
            return v;
        }
    }
    hist.len() - 1
}
