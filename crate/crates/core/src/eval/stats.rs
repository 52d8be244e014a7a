//! Discrete distributions of per-node statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Finite probability measure on the real line: strictly increasing support
/// points with positive masses summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    support: Vec<f64>,
    mass: Vec<f64>,
}

impl Histogram {
    /// Builds a measure from `(point, weight)` pairs, merging equal points,
    /// dropping zero weights and normalizing.
    pub fn from_weights(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.iter().any(|&(x, w)| !x.is_finite() || !w.is_finite() || w < 0.0) {
            return Err(Error::InvalidArgument("histogram points and weights must be finite, weights >= 0".into()));
        }
        pairs.retain(|&(_, w)| w > 0.0);
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("histogram has no mass".into()));
        }
        let mut support: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut mass: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            if support.last() == Some(&x) {
                *mass.last_mut().unwrap() += w;
            } else {
                support.push(x);
                mass.push(w);
            }
        }
        mass.iter_mut().for_each(|m| *m /= total);
        Ok(Self { support, mass })
    }

    /// Unit mass at `x`.
    pub fn point(x: f64) -> Self {
        Self { support: vec![x], mass: vec![1.0] }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Mass at exactly `x` (0 when `x` is not a support point).
    pub fn mass_at(&self, x: f64) -> f64 {
        self.support.iter().position(|&s| s == x).map_or(0.0, |i| self.mass[i])
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.mass).map(|(x, m)| x * m).sum()
    }
}

/// Empirical degree pmf (sparse over integer degrees).
pub fn degree_hist(g: &Graph) -> Histogram {
    let mut counts = vec![0usize; g.n()];
    for v in 0..g.n() {
        counts[g.degree(v)] += 1;
    }
    let pairs = counts.iter().enumerate().map(|(d, &c)| (d as f64, c as f64)).collect();
    Histogram::from_weights(pairs).expect("graph has at least one node")
}

/// Local clustering coefficient per node; 0 for degree below 2.
pub fn clustering_coefficients(g: &Graph) -> Vec<f64> {
    (0..g.n())
        .map(|v| {
            let nb = g.neighbors(v);
            let d = nb.len();
            if d < 2 {
                return 0.0;
            }
            let mut tri = 0usize;
            for (a, &u) in nb.iter().enumerate() {
                for &w in &nb[a + 1..] {
                    if g.has_edge(u, w) {
                        tri += 1;
                    }
                }
            }
            2.0 * tri as f64 / (d * (d - 1)) as f64
        })
        .collect()
}

/// Clustering coefficients binned uniformly over `[0, 1]` (last bin closed
/// on the right); each bin's mass sits at its center.
pub fn clustering_hist(g: &Graph, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be at least 1".into()));
    }
    let mut counts = vec![0usize; bins];
    for c in clustering_coefficients(g) {
        let idx = ((c * bins as f64).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let width = 1.0 / bins as f64;
    let pairs = counts.iter().enumerate().map(|(i, &c)| ((i as f64 + 0.5) * width, c as f64)).collect();
    Histogram::from_weights(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::gen_grid;

    fn complete(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degree_hist(&complete(4)), Histogram::point(3.0));
        let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let h = degree_hist(&star);
        assert_eq!(h.support(), &[1.0, 4.0]);
        assert!((h.mass_at(4.0) - 0.2).abs() < 1e-15 && (h.mass_at(1.0) - 0.8).abs() < 1e-15);
        let h = degree_hist(&gen_grid(3, 3).unwrap());
        assert_eq!(h.support(), &[2.0, 3.0, 4.0]);
        let expect = [4.0 / 9.0, 4.0 / 9.0, 1.0 / 9.0];
        assert!(h.mass().iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn clustering_examples() {
        let h = clustering_hist(&complete(4), 100).unwrap();
        assert_eq!(h.support().len(), 1);
        assert!((h.support()[0] - 0.995).abs() < 1e-12);
        let tree = Graph::from_edges(5, &[(0, 1), (0, 2), (2, 3), (2, 4)]).unwrap();
        let h = clustering_hist(&tree, 100).unwrap();
        assert_eq!(h.support(), &[0.005]);
        // 4-cycle 0-1-2-3 plus diagonal 0-2
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]).unwrap();
        let c = clustering_coefficients(&g);
        for v in 0..4 {
            // brute force: ordered pairs of distinct neighbors that are adjacent
            let nb = g.neighbors(v);
            let closed = nb.iter().flat_map(|&a| nb.iter().map(move |&b| (a, b))).filter(|&(a, b)| a != b && g.has_edge(a, b)).count();
            let d = nb.len() as f64;
            assert!((c[v] - closed as f64 / (d * (d - 1.0))).abs() < 1e-15);
        }
        assert_eq!(c, vec![2.0 / 3.0, 1.0, 2.0 / 3.0, 1.0]);
        assert!(clustering_hist(&g, 0).is_err());
    }

    #[test]
    fn histogram_normalizes_and_merges() {
        let h = Histogram::from_weights(vec![(2.0, 1.0), (0.0, 2.0), (2.0, 1.0), (5.0, 0.0)]).unwrap();
        assert_eq!(h.support(), &[0.0, 2.0]);
        assert_eq!(h.mass(), &[0.5, 0.5]);
        assert!(Histogram::from_weights(vec![(1.0, 0.0)]).is_err());
        assert!(Histogram::from_weights(vec![(1.0, -1.0)]).is_err());
    }
}
