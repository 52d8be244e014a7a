//! Experiment configuration in a flat `key = value` text format.
//!
//! ```text
//! # grid experiment
//! dataset = grid
//! count = 100
//! n_min = 16
//! n_max = 64
//! variant = full
//! steps = 3000
//! m = auto
//! ```
//!
//! Blank lines and `#` comments are ignored. Unset keys keep the defaults
//! of the chosen dataset. Unknown keys and malformed values are reported
//! with their line number.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datasets::{DatasetKind, DatasetSpec};
use crate::error::{Error, Result};
use crate::eval::EvalParams;
use crate::model::{ModelConfig, Variant};
use crate::train::TrainConfig;

/// A value that is either derived from the data or fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
    Fixed(usize),
}

impl FromStr for Auto {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(Auto::Auto);
        }
        match s.parse::<usize>() {
            Ok(v) if v >= 1 => Ok(Auto::Fixed(v)),
            _ => Err(format!("expected `auto` or a positive integer, got `{s}`")),
        }
    }
}

impl std::fmt::Display for Auto {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Auto::Auto => f.write_str("auto"),
            Auto::Fixed(v) => write!(f, "{v}"),
        }
    }
}

/// Model dimensions except the row width, which is resolved from the data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSettings {
    pub variant: Variant,
    pub embed_dim: usize,
    pub graph_layers: usize,
    pub graph_hidden: usize,
    pub edge_layers: usize,
    pub edge_hidden: usize,
    pub edge_mlp_hidden: usize,
    /// `auto` uses the largest training graph.
    pub max_nodes: Auto,
}

impl ModelSettings {
    /// Desk-scale defaults: 2x32 graph GRU, 2x16 edge GRU.
    pub fn desk(variant: Variant) -> Self {
        Self {
            variant,
            embed_dim: 16,
            graph_layers: 2,
            graph_hidden: 32,
            edge_layers: 2,
            edge_hidden: 16,
            edge_mlp_hidden: if variant == Variant::Full { 8 } else { 32 },
            max_nodes: Auto::Auto,
        }
    }

    pub fn resolve(&self, m_width: usize, largest_graph: usize) -> ModelConfig {
        ModelConfig {
            variant: self.variant,
            m_width,
            embed_dim: self.embed_dim,
            graph_layers: self.graph_layers,
            graph_hidden: self.graph_hidden,
            edge_layers: self.edge_layers,
            edge_hidden: self.edge_hidden,
            edge_mlp_hidden: self.edge_mlp_hidden,
            max_nodes: match self.max_nodes {
                Auto::Auto => largest_graph,
                Auto::Fixed(v) => v,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub dataset: DatasetSpec,
    pub train_fraction: f64,
    pub m: Auto,
    pub m_trials: usize,
    pub m_percentile: f64,
    pub model: ModelSettings,
    pub train: TrainConfig,
    pub eval: EvalParams,
    pub nll_orderings: usize,
}

impl ExperimentConfig {
    pub fn for_dataset(kind: DatasetKind) -> Self {
        Self {
            seed: 0,
            dataset: DatasetSpec::preset(kind),
            train_fraction: 0.8,
            m: Auto::Auto,
            m_trials: 100_000,
            m_percentile: 0.999,
            model: ModelSettings::desk(Variant::Full),
            train: TrainConfig::default(),
            eval: EvalParams::default(),
            nll_orderings: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dataset.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config("train_fraction must lie in (0, 1)".into()));
        }
        if self.m_trials == 0 {
            return Err(Error::Config("m_trials must be at least 1".into()));
        }
        if !(self.m_percentile > 0.0 && self.m_percentile <= 1.0) {
            return Err(Error::Config("m_percentile must lie in (0, 1]".into()));
        }
        if self.nll_orderings == 0 {
            return Err(Error::Config("nll_orderings must be at least 1".into()));
        }
        self.model.resolve(1, 1).validate().map_err(|e| Error::Config(e.to_string()))?;
        self.train.validate()?;
        self.eval.validate()
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| err(idx + 1, format!("expected `key = value`, got `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if pairs.iter().any(|(_, pk, _): &(usize, &str, &str)| *pk == k) {
                return Err(err(idx + 1, format!("duplicate key `{k}`")));
            }
            pairs.push((idx + 1, k, v));
        }
        let kind = match pairs.iter().find(|p| p.1 == "dataset") {
            Some(&(line, _, v)) => v.parse::<DatasetKind>().map_err(|e| err(line, e.to_string()))?,
            None => return Err(err(1, "missing required key `dataset`".into())),
        };
        let mut cfg = Self::for_dataset(kind);
        for (line, k, v) in pairs {
            cfg.set(k, v).map_err(|msg| err(line, msg))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("bad value `{v}` for `{key}`"))
        }
        let d = &mut self.dataset;
        let m = &mut self.model;
        let t = &mut self.train;
        match key {
            "dataset" => d.kind = value.parse().map_err(|e: Error| e.to_string())?,
            "seed" => self.seed = num(key, value)?,
            "count" => d.count = num(key, value)?,
            "n_min" => d.n_min = num(key, value)?,
            "n_max" => d.n_max = num(key, value)?,
            "p" => d.p = num(key, value)?,
            "m_attach" => d.m_attach = num(key, value)?,
            "inter_rate" => d.inter_rate = num(key, value)?,
            "train_fraction" => self.train_fraction = num(key, value)?,
            "m" => self.m = value.parse()?,
            "m_trials" => self.m_trials = num(key, value)?,
            "m_percentile" => self.m_percentile = num(key, value)?,
            "variant" => m.variant = value.parse().map_err(|e: Error| e.to_string())?,
            "embed_dim" => m.embed_dim = num(key, value)?,
            "graph_layers" => m.graph_layers = num(key, value)?,
            "graph_hidden" => m.graph_hidden = num(key, value)?,
            "edge_layers" => m.edge_layers = num(key, value)?,
            "edge_hidden" => m.edge_hidden = num(key, value)?,
            "edge_mlp_hidden" => m.edge_mlp_hidden = num(key, value)?,
            "max_nodes" => m.max_nodes = value.parse()?,
            "steps" => t.steps = num(key, value)?,
            "batch_size" => t.batch_size = num(key, value)?,
            "lr" => t.adam.schedule.base_lr = num(key, value)?,
            "lr_milestones" => t.adam.schedule.milestones = parse_milestones(value)?,
            "clip_norm" => t.adam.clip_norm = if value == "none" { None } else { Some(num(key, value)?) },
            "checkpoint_every" => t.checkpoint_every = num(key, value)?,
            "degree_sigma" => self.eval.degree_sigma = num(key, value)?,
            "clustering_sigma" => self.eval.clustering_sigma = num(key, value)?,
            "clustering_bins" => self.eval.clustering_bins = num(key, value)?,
            "orbit_sigma" => self.eval.orbit_sigma = num(key, value)?,
            "nll_orderings" => self.nll_orderings = num(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Every key with its resolved value, in the same format `parse` reads.
    pub fn to_text(&self) -> String {
        let d = &self.dataset;
        let m = &self.model;
        let t = &self.train;
        let e = &self.eval;
        let milestones: Vec<String> = t.adam.schedule.milestones.iter().map(|(s, f)| format!("{s}:{f}")).collect();
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv("dataset", d.kind.to_string());
        kv("seed", self.seed.to_string());
        kv("count", d.count.to_string());
        kv("n_min", d.n_min.to_string());
        kv("n_max", d.n_max.to_string());
        kv("p", d.p.to_string());
        kv("m_attach", d.m_attach.to_string());
        kv("inter_rate", d.inter_rate.to_string());
        kv("train_fraction", self.train_fraction.to_string());
        kv("m", self.m.to_string());
        kv("m_trials", self.m_trials.to_string());
        kv("m_percentile", self.m_percentile.to_string());
        kv("variant", m.variant.to_string());
        kv("embed_dim", m.embed_dim.to_string());
        kv("graph_layers", m.graph_layers.to_string());
        kv("graph_hidden", m.graph_hidden.to_string());
        kv("edge_layers", m.edge_layers.to_string());
        kv("edge_hidden", m.edge_hidden.to_string());
        kv("edge_mlp_hidden", m.edge_mlp_hidden.to_string());
        kv("max_nodes", m.max_nodes.to_string());
        kv("steps", t.steps.to_string());
        kv("batch_size", t.batch_size.to_string());
        kv("lr", t.adam.schedule.base_lr.to_string());
        kv("lr_milestones", if milestones.is_empty() { "none".into() } else { milestones.join(",") });
        kv("clip_norm", t.adam.clip_norm.map_or("none".into(), |c| c.to_string()));
        kv("checkpoint_every", t.checkpoint_every.to_string());
        kv("degree_sigma", e.degree_sigma.to_string());
        kv("clustering_sigma", e.clustering_sigma.to_string());
        kv("clustering_bins", e.clustering_bins.to_string());
        kv("orbit_sigma", e.orbit_sigma.to_string());
        kv("nll_orderings", self.nll_orderings.to_string());
        s
    }
}

/// `none` or comma-separated `step:multiplier` pairs.
fn parse_milestones(v: &str) -> std::result::Result<Vec<(u64, f64)>, String> {
    if v == "none" {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|part| {
            let (s, m) = part.trim().split_once(':').ok_or_else(|| format!("bad milestone `{part}` (want step:multiplier)"))?;
            let s = s.trim().parse().map_err(|_| format!("bad milestone step `{s}`"))?;
            let m = m.trim().parse().map_err(|_| format!("bad milestone multiplier `{m}`"))?;
            Ok((s, m))
        })
        .collect()
}
