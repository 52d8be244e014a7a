//! Hierarchical autoregressive graph model.
//!
//! A graph-level GRU reads one adjacency row per step (an all-ones start row
//! first) and its top-layer state parameterizes the next row:
//!
//! * [`Variant::Simple`]: an MLP emits independent Bernoulli logits for all
//!   positions of the row.
//! * [`Variant::Full`]: a linear map of the graph state initializes the lowest
//!   layer of an edge-level GRU, which emits the row one bit at a time, each
//!   step reading the previous bit (1 before the first bit).
//!
//! An all-zero row ends the sequence. Node 0 always exists, so a zero first
//! row yields a single isolated node.
//!
//! Only the non-padding positions of a row (the last `min(i, M)` of them for
//! node `i`) are modeled; the edge-level GRU runs over exactly those.

use std::hash::{Hash, Hasher};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs_order, Graph, NodeOrdering};
use crate::nn::loss::{bce_logit, log_prob_bit};
use crate::nn::ops::sigmoid;
use crate::nn::{Activation, GruStack, GruTrace, Linear, Mlp, MlpCache, ParamSet};
use crate::par;
use crate::sequence::{decode, encode, valid_len, GraphSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Edge-level GRU over the bits of each row.
    Full,
    /// Independent Bernoulli bits from an MLP.
    Simple,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Variant::Full),
            "simple" => Ok(Variant::Simple),
            _ => Err(Error::InvalidArgument(format!("unknown variant `{s}` (expected full or simple)"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Full => "full",
            Variant::Simple => "simple",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub variant: Variant,
    pub m_width: usize,
    /// Width of the linear embedding of each row fed to the graph-level GRU.
    pub embed_dim: usize,
    pub graph_layers: usize,
    pub graph_hidden: usize,
    pub edge_layers: usize,
    pub edge_hidden: usize,
    /// Hidden width of the output MLP (edge-level output for `Full`, row
    /// output for `Simple`).
    pub edge_mlp_hidden: usize,
    pub max_nodes: usize,
}

impl ModelConfig {
    /// Larger published configuration: 4x128 graph GRU, 4x16 edge GRU.
    pub fn large(variant: Variant, m_width: usize, max_nodes: usize) -> Self {
        Self {
            variant,
            m_width,
            embed_dim: 64,
            graph_layers: 4,
            graph_hidden: 128,
            edge_layers: 4,
            edge_hidden: 16,
            edge_mlp_hidden: if variant == Variant::Full { 8 } else { 64 },
            max_nodes,
        }
    }

    /// Smaller published configuration: 4x64 graph GRU, 4x16 edge GRU.
    pub fn small(variant: Variant, m_width: usize, max_nodes: usize) -> Self {
        Self {
            embed_dim: 32,
            graph_hidden: 64,
            edge_mlp_hidden: if variant == Variant::Full { 8 } else { 32 },
            ..Self::large(variant, m_width, max_nodes)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("m_width", self.m_width),
            ("embed_dim", self.embed_dim),
            ("graph_layers", self.graph_layers),
            ("graph_hidden", self.graph_hidden),
            ("edge_layers", self.edge_layers),
            ("edge_hidden", self.edge_hidden),
            ("edge_mlp_hidden", self.edge_mlp_hidden),
            ("max_nodes", self.max_nodes),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Head {
    Simple { mlp: Mlp },
    Full { proj: Linear, edge: GruStack, out: Mlp },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Layout {
    embed: Linear,
    graph: GruStack,
    head: Head,
}

impl Layout {
    fn build(cfg: &ModelConfig, ps: &mut ParamSet) -> Self {
        let embed = Linear::alloc(ps, "graph_embed", cfg.m_width, cfg.embed_dim);
        let graph = GruStack::alloc(ps, "graph_rnn", cfg.embed_dim, cfg.graph_hidden, cfg.graph_layers);
        let head = match cfg.variant {
            Variant::Simple => Head::Simple {
                mlp: Mlp::alloc(
                    ps,
                    "row_mlp",
                    &[cfg.graph_hidden, cfg.edge_mlp_hidden, cfg.m_width],
                    &[Activation::Relu, Activation::Identity],
                ),
            },
            Variant::Full => Head::Full {
                proj: Linear::alloc(ps, "edge_init", cfg.graph_hidden, cfg.edge_hidden),
                edge: GruStack::alloc(ps, "edge_rnn", 1, cfg.edge_hidden, cfg.edge_layers),
                out: Mlp::alloc(
                    ps,
                    "edge_mlp",
                    &[cfg.edge_hidden, cfg.edge_mlp_hidden, 1],
                    &[Activation::Relu, Activation::Identity],
                ),
            },
        };
        Self { embed, graph, head }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Eos,
    MaxNodes,
}

/// Result of ancestral sampling.
#[derive(Debug, Clone)]
pub struct SampleTrace {
    pub seq: GraphSequence,
    /// Per graph-level step, the probability of a 1 at each non-padding
    /// position (including the terminating row when stopped by EOS).
    pub probs: Vec<Vec<f64>>,
    /// The sampled bits matching `probs`.
    pub bits: Vec<Vec<u8>>,
    /// Sum of log-probabilities of every sampled bit.
    pub log_likelihood: f64,
    pub stop: StopReason,
}

impl SampleTrace {
    pub fn graph(&self) -> Graph {
        decode(&self.seq)
    }
}

/// Model architecture plus its parameters.
#[derive(Debug, Clone)]
pub struct GraphRnn {
    config: ModelConfig,
    layout: Layout,
    params: ParamSet,
}

impl GraphRnn {
    /// Fresh model: weights uniform in `±1/sqrt(fan_in)`, biases zero.
    pub fn new<R: Rng + ?Sized>(config: ModelConfig, rng: &mut R) -> Result<Self> {
        let mut model = Self::zeroed(config)?;
        let ps = &mut model.params;
        model.layout.embed.init(ps, rng);
        model.layout.graph.init(ps, rng);
        match &model.layout.head {
            Head::Simple { mlp } => mlp.init(ps, rng),
            Head::Full { proj, edge, out } => {
                proj.init(ps, rng);
                edge.init(ps, rng);
                out.init(ps, rng);
            }
        }
        Ok(model)
    }

    /// Model with every parameter zero.
    pub fn zeroed(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut params = ParamSet::new();
        let layout = Layout::build(&config, &mut params);
        Ok(Self { config, layout, params })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    fn check_width(&self, seq: &GraphSequence) -> Result<()> {
        if seq.m_width() != self.config.m_width {
            return Err(Error::WidthMismatch { expected: self.config.m_width, got: seq.m_width() });
        }
        Ok(())
    }

    /// Teacher-forced negative log-likelihood of `seq` under parameters `p`
    /// (which must follow this model's layout), including the terminating
    /// all-zero row. Gradients are accumulated into `grad` when given, and
    /// per-step losses appended to `per_step` when given.
    pub fn loss_with(
        &self,
        p: &[f64],
        seq: &GraphSequence,
        mut grad: Option<&mut [f64]>,
        mut per_step: Option<&mut Vec<f64>>,
    ) -> Result<f64> {
        self.check_width(seq)?;
        if p.len() != self.params.len() {
            return Err(Error::Shape(format!("{} parameters for a {}-parameter model", p.len(), self.params.len())));
        }
        let m = self.config.m_width;
        let steps = seq.n();
        let e_dim = self.config.embed_dim;
        let h_dim = self.config.graph_hidden;
        let lay = &self.layout;

        // graph-level inputs: start row, then every row except the last target
        let mut raw = vec![0.0; steps * m];
        raw[..m].fill(1.0);
        for (r, row) in seq.rows().enumerate().take(steps - 1) {
            for (dst, &b) in raw[(r + 1) * m..(r + 2) * m].iter_mut().zip(row) {
                *dst = b as f64;
            }
        }
        let mut embedded = vec![0.0; steps * e_dim];
        for t in 0..steps {
            lay.embed.forward(p, &raw[t * m..(t + 1) * m], &mut embedded[t * e_dim..(t + 1) * e_dim]);
        }
        let zeros: Vec<Vec<f64>> = lay.graph.layers.iter().map(|l| vec![0.0; l.hidden]).collect();
        let init: Vec<&[f64]> = zeros.iter().map(Vec::as_slice).collect();
        let trace = GruTrace::forward(&lay.graph, p, &init, &embedded);

        let want_grad = grad.is_some();
        let mut d_top = if want_grad { vec![0.0; steps * h_dim] } else { Vec::new() };
        let mut total = 0.0;
        let eos_row = vec![0u8; m];
        let mut cache = MlpCache::default();

        for t in 0..steps {
            let target = if t + 1 < steps { seq.row(t) } else { &eos_row };
            let k = valid_len(t + 1, m);
            let bits = &target[m - k..];
            let top = trace.top(t);
            let mut step_loss = 0.0;
            match &lay.head {
                Head::Simple { mlp } => {
                    mlp.forward_cached(p, top, &mut cache);
                    let logits = cache.output();
                    let mut dlogits = vec![0.0; m];
                    for (j, &b) in bits.iter().enumerate() {
                        let (l, d) = bce_logit(logits[m - k + j], b == 1);
                        step_loss += l;
                        dlogits[m - k + j] = d;
                    }
                    if let Some(g) = grad.as_deref_mut() {
                        mlp.backward(p, g, &cache, &dlogits, Some(&mut d_top[t * h_dim..(t + 1) * h_dim]));
                    }
                }
                Head::Full { proj, edge, out } => {
                    let eh = edge.hidden();
                    let mut init0 = vec![0.0; eh];
                    proj.forward(p, top, &mut init0);
                    let upper: Vec<Vec<f64>> = edge.layers[1..].iter().map(|l| vec![0.0; l.hidden]).collect();
                    let mut einit: Vec<&[f64]> = vec![&init0];
                    einit.extend(upper.iter().map(Vec::as_slice));
                    let mut ein = vec![0.0; k];
                    ein[0] = 1.0;
                    for j in 1..k {
                        ein[j] = bits[j - 1] as f64;
                    }
                    let etrace = GruTrace::forward(edge, p, &einit, &ein);
                    let mut d_etop = if want_grad { vec![0.0; k * eh] } else { Vec::new() };
                    for (j, &b) in bits.iter().enumerate() {
                        out.forward_cached(p, etrace.top(j), &mut cache);
                        let (l, d) = bce_logit(cache.output()[0], b == 1);
                        step_loss += l;
                        if let Some(g) = grad.as_deref_mut() {
                            out.backward(p, g, &cache, &[d], Some(&mut d_etop[j * eh..(j + 1) * eh]));
                        }
                    }
                    if let Some(g) = grad.as_deref_mut() {
                        let d_init = etrace.backward(edge, p, g, &ein, &d_etop, None);
                        proj.backward(p, g, top, &d_init[0], Some(&mut d_top[t * h_dim..(t + 1) * h_dim]));
                    }
                }
            }
            total += step_loss;
            if let Some(ps) = per_step.as_deref_mut() {
                ps.push(step_loss);
            }
        }

        if let Some(g) = grad {
            let mut d_emb = vec![0.0; steps * e_dim];
            trace.backward(&lay.graph, p, g, &embedded, &d_top, Some(&mut d_emb));
            for t in 0..steps {
                lay.embed.backward(p, g, &raw[t * m..(t + 1) * m], &d_emb[t * e_dim..(t + 1) * e_dim], None);
            }
        }
        Ok(total)
    }

    /// Exact `-ln p(seq)` in nats under the current parameters.
    pub fn sequence_nll(&self, seq: &GraphSequence) -> Result<f64> {
        self.loss_with(self.params.data(), seq, None, None)
    }

    /// Per-step contributions to [`Self::sequence_nll`]; the last entry is the
    /// terminating row.
    pub fn step_nlls(&self, seq: &GraphSequence) -> Result<Vec<f64>> {
        let mut v = Vec::with_capacity(seq.n());
        self.loss_with(self.params.data(), seq, None, Some(&mut v))?;
        Ok(v)
    }

    /// Loss and gradient of one sequence under the current parameters.
    pub fn loss_and_grad(&self, seq: &GraphSequence) -> Result<(f64, Vec<f64>)> {
        let mut g = vec![0.0; self.params.len()];
        let l = self.loss_with(self.params.data(), seq, Some(&mut g), None)?;
        Ok((l, g))
    }

    /// Ancestral sampling until an all-zero row or `max_nodes` nodes.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, max_nodes: usize) -> Result<SampleTrace> {
        if max_nodes == 0 {
            return Err(Error::InvalidArgument("max_nodes must be at least 1".into()));
        }
        let p = self.params.data();
        let m = self.config.m_width;
        let lay = &self.layout;
        let mut h: Vec<Vec<f64>> = lay.graph.layers.iter().map(|l| vec![0.0; l.hidden]).collect();
        let mut x = vec![1.0; m];
        let mut emb = vec![0.0; self.config.embed_dim];
        let mut rows: Vec<Vec<u8>> = Vec::new();
        let mut probs = Vec::new();
        let mut bits_out = Vec::new();
        let mut ll = 0.0;
        let mut cache = MlpCache::default();

        let stop = loop {
            let t = rows.len();
            if t + 1 >= max_nodes {
                break StopReason::MaxNodes;
            }
            lay.embed.forward(p, &x, &mut emb);
            h = lay.graph.step(p, &h, &emb)?;
            let top = h.last().unwrap();
            let k = valid_len(t + 1, m);
            let mut row_p = Vec::with_capacity(k);
            let mut row_b = Vec::with_capacity(k);
            match &lay.head {
                Head::Simple { mlp } => {
                    mlp.forward_cached(p, top, &mut cache);
                    for &z in &cache.output()[m - k..] {
                        let pr = sigmoid(z);
                        let bit = rng.gen::<f64>() < pr;
                        ll += log_prob_bit(z, bit);
                        row_p.push(pr);
                        row_b.push(bit as u8);
                    }
                }
                Head::Full { proj, edge, out } => {
                    let mut eh: Vec<Vec<f64>> = edge.layers.iter().map(|l| vec![0.0; l.hidden]).collect();
                    proj.forward(p, top, &mut eh[0]);
                    let mut prev = 1.0;
                    for _ in 0..k {
                        eh = edge.step(p, &eh, &[prev])?;
                        out.forward_cached(p, eh.last().unwrap(), &mut cache);
                        let z = cache.output()[0];
                        let pr = sigmoid(z);
                        let bit = rng.gen::<f64>() < pr;
                        ll += log_prob_bit(z, bit);
                        row_p.push(pr);
                        row_b.push(bit as u8);
                        prev = bit as u8 as f64;
                    }
                }
            }
            let done = row_b.iter().all(|&b| b == 0);
            let mut row = vec![0u8; m];
            row[m - k..].copy_from_slice(&row_b);
            probs.push(row_p);
            bits_out.push(row_b);
            if done {
                break StopReason::Eos;
            }
            x.iter_mut().zip(&row).for_each(|(x, &b)| *x = b as f64);
            rows.push(row);
        };

        let seq = GraphSequence::from_rows(rows.len() + 1, m, &rows)?;
        Ok(SampleTrace { seq, probs, bits: bits_out, log_likelihood: ll, stop })
    }

    /// Draws `count` graphs, each from its own stream seeded off `rng`.
    pub fn sample_graphs<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<Graph>> {
        let seeds = par::child_seeds(rng, count);
        par::map(&seeds, |&s| self.sample(&mut par::rng_from_seed(s), self.config.max_nodes).map(|t| t.graph()))
            .into_iter()
            .collect()
    }

    /// Mean over graphs of the mean NLL over `orderings` random BFS encodings.
    ///
    /// Orderings for each graph are drawn from a stream keyed by `seed` and
    /// the graph itself, so the result does not depend on list order.
    pub fn dataset_nll(&self, graphs: &[Graph], orderings: usize, seed: u64) -> Result<f64> {
        if orderings == 0 {
            return Err(Error::InvalidArgument("orderings must be at least 1".into()));
        }
        if graphs.is_empty() {
            return Err(Error::InvalidArgument("dataset_nll needs at least one graph".into()));
        }
        let per_graph: Vec<Result<f64>> = par::map(graphs, |g| {
            let mut rng = par::rng_from_seed(seed ^ graph_fingerprint(g));
            let mut acc = 0.0;
            for _ in 0..orderings {
                let seq = random_bfs_sequence(g, self.config.m_width, &mut rng);
                acc += self.sequence_nll(&seq)?;
            }
            Ok(acc / orderings as f64)
        });
        let mut vals = per_graph.into_iter().collect::<Result<Vec<f64>>>()?;
        // sorted summation keeps the mean independent of list order
        vals.sort_by(f64::total_cmp);
        Ok(vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

/// Encoding of `g` under a BFS seeded by a uniformly random permutation.
pub fn random_bfs_sequence<R: Rng + ?Sized>(g: &Graph, m_width: usize, rng: &mut R) -> GraphSequence {
    let seed = NodeOrdering::random(g.n(), rng);
    let bfs = bfs_order(g, &seed);
    encode(g, &bfs.order, m_width).expect("valid width and ordering").seq
}

/// Stable 64-bit FNV-1a digest of a graph's edge list.
pub fn graph_fingerprint(g: &Graph) -> u64 {
    struct Fnv(u64);
    impl Hasher for Fnv {
        fn finish(&self) -> u64 {
            self.0
        }
        fn write(&mut self, bytes: &[u8]) {
            for &b in bytes {
                self.0 ^= b as u64;
                self.0 = self.0.wrapping_mul(0x100_0000_01b3);
            }
        }
    }
    let mut h = Fnv(0xcbf2_9ce4_8422_2325);
    (g.n() as u64).hash(&mut h);
    for (i, j) in g.edges() {
        (i as u64, j as u64).hash(&mut h);
    }
    h.finish()
}
