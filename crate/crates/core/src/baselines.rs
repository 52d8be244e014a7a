//! Moment-matched E-R and B-A baselines.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datasets::{gen_ba, gen_er};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErFit {
    pub p_hat: f64,
    /// Training node counts; generation draws uniformly from these.
    pub node_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaFit {
    pub m_hat: usize,
    pub node_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BaselineFit {
    Er(ErFit),
    Ba(BaFit),
}

fn node_counts(train: &[Graph]) -> Result<Vec<usize>> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("cannot fit a baseline to an empty set".into()));
    }
    Ok(train.iter().map(Graph::n).collect())
}

/// `p = sum |E| / sum C(n, 2)`.
pub fn fit_er(train: &[Graph]) -> Result<ErFit> {
    let node_counts = node_counts(train)?;
    let edges: usize = train.iter().map(Graph::edge_count).sum();
    let pairs: usize = node_counts.iter().map(|&n| n * (n - 1) / 2).sum();
    let p_hat = if pairs == 0 { 0.0 } else { edges as f64 / pairs as f64 };
    Ok(ErFit { p_hat, node_counts })
}

/// `m = round(mean |E| / n)`, at least 1.
pub fn fit_ba(train: &[Graph]) -> Result<BaFit> {
    let node_counts = node_counts(train)?;
    let mean = train.iter().map(|g| g.edge_count() as f64 / g.n() as f64).sum::<f64>() / train.len() as f64;
    Ok(BaFit { m_hat: (mean.round() as usize).max(1), node_counts })
}

impl BaselineFit {
    fn node_counts(&self) -> &[usize] {
        match self {
            BaselineFit::Er(f) => &f.node_counts,
            BaselineFit::Ba(f) => &f.node_counts,
        }
    }

    fn generate(&self, n: usize, rng: &mut impl Rng) -> Result<Graph> {
        match self {
            BaselineFit::Er(f) => gen_er(n, f.p_hat, rng),
            // B-A needs more than m nodes; smaller sizes fall back to a clique
            // on the available nodes, which is what the seed clique would be
            BaselineFit::Ba(f) if n <= f.m_hat => {
                let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
                Graph::from_edges(n, &edges)
            }
            BaselineFit::Ba(f) => gen_ba(n, f.m_hat, rng),
        }
    }
}

/// Draws `count` graphs; each uses its own stream seeded off `rng`.
pub fn sample_baseline<R: Rng + ?Sized>(fit: &BaselineFit, count: usize, rng: &mut R) -> Result<Vec<Graph>> {
    let seeds = par::child_seeds(rng, count);
    par::map(&seeds, |&s| {
        let mut r = par::rng_from_seed(s);
        let n = *fit.node_counts().choose(&mut r).expect("fit has node counts");
        fit.generate(n, &mut r)
    })
    .into_iter()
    .collect()
}
