//! Synthetic graph families, train/test splitting and edge perturbation.

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par;

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} = {p} is not a probability")))
    }
}

/// Erdős–Rényi G(n, p).
pub fn gen_er<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    check_prob("p", p)?;
    let mut g = Graph::empty(n)?;
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < p {
                g.add_edge(i, j)?;
            }
        }
    }
    Ok(g)
}

/// Barabási–Albert preferential attachment seeded with a clique on
/// `m_attach + 1` nodes; every later node links to `m_attach` distinct
/// existing nodes chosen proportionally to degree.
pub fn gen_ba<R: Rng + ?Sized>(n: usize, m_attach: usize, rng: &mut R) -> Result<Graph> {
    if m_attach == 0 || n <= m_attach {
        return Err(Error::InvalidArgument(format!("B-A needs n > m_attach >= 1 (n = {n}, m = {m_attach})")));
    }
    let mut g = Graph::empty(n)?;
    // every edge endpoint appears once, so uniform draws are degree-proportional
    let mut endpoints = Vec::with_capacity(2 * (m_attach * n));
    for i in 0..=m_attach {
        for j in (i + 1)..=m_attach {
            g.add_edge(i, j)?;
            endpoints.push(i);
            endpoints.push(j);
        }
    }
    let mut targets = Vec::with_capacity(m_attach);
    for v in (m_attach + 1)..n {
        targets.clear();
        while targets.len() < m_attach {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            g.add_edge(v, t)?;
            endpoints.push(v);
            endpoints.push(t);
        }
    }
    Ok(g)
}

/// Disjoint E-R blocks of the given sizes plus `inter_edges` cross-block
/// edges drawn uniformly without replacement.
pub fn gen_community_blocks<R: Rng + ?Sized>(sizes: &[usize], p_intra: f64, inter_edges: usize, rng: &mut R) -> Result<Graph> {
    check_prob("p_intra", p_intra)?;
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidArgument(format!("invalid block sizes {sizes:?}")));
    }
    let n: usize = sizes.iter().sum();
    let mut g = Graph::empty(n)?;
    let mut block_of = Vec::with_capacity(n);
    let mut start = 0;
    for (b, &s) in sizes.iter().enumerate() {
        for i in start..start + s {
            block_of.push(b);
            for j in (i + 1)..start + s {
                if rng.gen::<f64>() < p_intra {
                    g.add_edge(i, j)?;
                }
            }
        }
        start += s;
    }
    let cross: Vec<(usize, usize)> =
        (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).filter(|&(i, j)| block_of[i] != block_of[j]).collect();
    if inter_edges > cross.len() {
        return Err(Error::InvalidArgument(format!(
            "{inter_edges} inter-community edges requested but only {} cross pairs exist",
            cross.len()
        )));
    }
    for k in index::sample(rng, cross.len(), inter_edges) {
        let (i, j) = cross[k];
        g.add_edge(i, j)?;
    }
    Ok(g)
}

/// Two E-R communities of sizes `ceil(n/2)` and `floor(n/2)` joined by
/// `round(inter_rate * n)` cross edges.
pub fn gen_community2<R: Rng + ?Sized>(n: usize, p_intra: f64, inter_rate: f64, rng: &mut R) -> Result<Graph> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("two-community graphs need n >= 4, got {n}")));
    }
    if inter_rate < 0.0 {
        return Err(Error::InvalidArgument("inter_rate must be non-negative".into()));
    }
    let inter = (inter_rate * n as f64).round() as usize;
    gen_community_blocks(&[n.div_ceil(2), n / 2], p_intra, inter, rng)
}

/// Block sizes for the four-community recipe: three sizes uniform in
/// `[n/4 - 2, n/4 + 2]`, the last block takes the remainder.
pub fn community4_sizes<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<[usize; 4]> {
    if n < 16 {
        return Err(Error::InvalidArgument(format!("four-community graphs need n >= 16, got {n}")));
    }
    let base = n / 4;
    let lo = base.saturating_sub(2).max(1);
    let hi = base + 2;
    loop {
        let a = rng.gen_range(lo..=hi);
        let b = rng.gen_range(lo..=hi);
        let c = rng.gen_range(lo..=hi);
        if a + b + c < n {
            return Ok([a, b, c, n - a - b - c]);
        }
    }
}

/// Four E-R communities with `p = 0.7` and `round(0.01 n^2)` cross edges.
pub fn gen_community4<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Graph> {
    let sizes = community4_sizes(n, rng)?;
    let inter = (0.01 * (n * n) as f64).round() as usize;
    gen_community_blocks(&sizes, 0.7, inter, rng)
}

/// `rows x cols` lattice; node `(r, c)` is `r * cols + c`.
pub fn gen_grid(rows: usize, cols: usize) -> Result<Graph> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("grid sides must be positive".into()));
    }
    let mut g = Graph::empty(rows * cols)?;
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                g.add_edge(v, v + 1)?;
            }
            if r + 1 < rows {
                g.add_edge(v, v + cols)?;
            }
        }
    }
    Ok(g)
}

/// Ladder with `n_rungs` rungs: nodes `0..n_rungs` form one rail, the rest the other.
pub fn gen_ladder(n_rungs: usize) -> Result<Graph> {
    if n_rungs < 2 {
        return Err(Error::InvalidArgument(format!("ladder needs at least 2 rungs, got {n_rungs}")));
    }
    let mut g = Graph::empty(2 * n_rungs)?;
    for i in 0..n_rungs {
        g.add_edge(i, n_rungs + i)?;
        if i + 1 < n_rungs {
            g.add_edge(i, i + 1)?;
            g.add_edge(n_rungs + i, n_rungs + i + 1)?;
        }
    }
    Ok(g)
}

/// Grid shapes `(rows, cols)` with `2 <= rows <= cols` and node count in range.
pub fn grid_shapes(n_min: usize, n_max: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 2..=n_max {
        for c in r..=n_max {
            let n = r * c;
            if n > n_max {
                break;
            }
            if n >= n_min {
                out.push((r, c));
            }
        }
    }
    out
}

/// Rewires `round(fraction * |E|)` uniformly chosen edges: each is deleted and
/// replaced by a uniformly chosen currently-absent pair. Node and edge counts
/// are preserved.
pub fn perturb_edges<R: Rng + ?Sized>(g: &Graph, fraction: f64, rng: &mut R) -> Result<Graph> {
    check_prob("fraction", fraction)?;
    let edges = g.edges();
    let k = (fraction * edges.len() as f64).round() as usize;
    let mut out = g.clone();
    let n = g.n();
    let total_pairs = n * (n - 1) / 2;
    for idx in index::sample(rng, edges.len(), k) {
        let (i, j) = edges[idx];
        out.remove_edge(i, j);
        let absent = total_pairs - out.edge_count();
        if absent * 4 >= total_pairs {
            loop {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                if a != b && !out.has_edge(a, b) {
                    out.add_edge(a, b)?;
                    break;
                }
            }
        } else {
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).filter(|&(a, b)| !out.has_edge(a, b)).collect();
            let (a, b) = pairs[rng.gen_range(0..pairs.len())];
            out.add_edge(a, b)?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct Split {
    #[serde(skip)]
    pub train: Vec<Graph>,
    #[serde(skip)]
    pub test: Vec<Graph>,
    pub train_fraction: f64,
    /// Indices into the original list.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Uniform shuffle followed by a prefix/suffix split.
pub fn split<R: Rng + ?Sized>(graphs: &[Graph], train_fraction: f64, rng: &mut R) -> Result<Split> {
    if graphs.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 graphs to split".into()));
    }
    check_prob("train_fraction", train_fraction)?;
    let mut idx: Vec<usize> = (0..graphs.len()).collect();
    idx.shuffle(rng);
    let n_train = (train_fraction * graphs.len() as f64).round() as usize;
    let (tr, te) = idx.split_at(n_train);
    Ok(Split {
        train: tr.iter().map(|&i| graphs[i].clone()).collect(),
        test: te.iter().map(|&i| graphs[i].clone()).collect(),
        train_fraction,
        train_indices: tr.to_vec(),
        test_indices: te.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Community2,
    Community4,
    Grid,
    Ba,
    Er,
    Ladder,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 6] = [
        DatasetKind::Community2,
        DatasetKind::Community4,
        DatasetKind::Grid,
        DatasetKind::Ba,
        DatasetKind::Er,
        DatasetKind::Ladder,
    ];
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DatasetKind::Community2 => "community2",
            DatasetKind::Community4 => "community4",
            DatasetKind::Grid => "grid",
            DatasetKind::Ba => "ba",
            DatasetKind::Er => "er",
            DatasetKind::Ladder => "ladder",
        };
        f.write_str(s)
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DatasetKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown dataset kind `{s}`")))
    }
}

/// Recipe for a synthetic dataset. For `ladder` the size range counts rungs;
/// for every other kind it counts nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub count: usize,
    pub n_min: usize,
    pub n_max: usize,
    /// Edge probability: intra-community for `community2`, global for `er`.
    pub p: f64,
    pub m_attach: usize,
    pub inter_rate: f64,
    pub seed: u64,
}

impl DatasetSpec {
    /// Defaults follow the published recipe for each family.
    pub fn preset(kind: DatasetKind) -> Self {
        let (count, n_min, n_max) = match kind {
            DatasetKind::Community2 => (500, 60, 160),
            DatasetKind::Community4 => (500, 48, 68),
            DatasetKind::Grid => (100, 100, 400),
            DatasetKind::Ba => (500, 100, 200),
            DatasetKind::Er => (100, 20, 60),
            DatasetKind::Ladder => (50, 4, 10),
        };
        Self { kind, count, n_min, n_max, p: 0.3, m_attach: 4, inter_rate: 0.05, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidArgument("count must be at least 1".into()));
        }
        if self.n_min > self.n_max {
            return Err(Error::InvalidArgument(format!("n_min {} > n_max {}", self.n_min, self.n_max)));
        }
        check_prob("p", self.p)?;
        if self.inter_rate < 0.0 {
            return Err(Error::InvalidArgument("inter_rate must be non-negative".into()));
        }
        let min_n = match self.kind {
            DatasetKind::Community2 => 4,
            DatasetKind::Community4 => 16,
            DatasetKind::Ba => self.m_attach + 1,
            DatasetKind::Ladder => 2,
            DatasetKind::Grid | DatasetKind::Er => 1,
        };
        if self.n_min < min_n {
            return Err(Error::InvalidArgument(format!("{} needs n_min >= {min_n}", self.kind)));
        }
        if self.kind == DatasetKind::Grid && grid_shapes(self.n_min, self.n_max).is_empty() {
            return Err(Error::InvalidArgument(format!("no grid shape with {}..={} nodes", self.n_min, self.n_max)));
        }
        Ok(())
    }

    /// Generates the dataset. Each graph draws from its own stream seeded from
    /// `seed`, so output is identical regardless of worker count.
    pub fn generate(&self) -> Result<Vec<Graph>> {
        self.validate()?;
        let mut master = par::rng_from_seed(self.seed);
        let seeds = par::child_seeds(&mut master, self.count);
        let shapes = grid_shapes(self.n_min, self.n_max);
        par::map(&seeds, |&s| {
            let mut rng = par::rng_from_seed(s);
            let n = rng.gen_range(self.n_min..=self.n_max);
            match self.kind {
                DatasetKind::Community2 => gen_community2(n, self.p, self.inter_rate, &mut rng),
                DatasetKind::Community4 => gen_community4(n, &mut rng),
                DatasetKind::Grid => {
                    let (r, c) = shapes[rng.gen_range(0..shapes.len())];
                    gen_grid(r, c)
                }
                DatasetKind::Ba => gen_ba(n, self.m_attach, &mut rng),
                DatasetKind::Er => gen_er(n, self.p, &mut rng),
                DatasetKind::Ladder => gen_ladder(n),
            }
        })
        .into_iter()
        .collect()
    }
}
