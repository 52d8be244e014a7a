//! End-to-end experiment runs: dataset, M estimate, training, sampling,
//! baselines, evaluation and NLL, all under one seed.
//!
//! Output layout of [`run_pipeline`]:
//!
//! ```text
//! out/
//!   config.txt            resolved configuration
//!   dataset/graphs.txt    full dataset
//!   dataset/split.json    train/test indices
//!   m.json                row width and how it was chosen
//!   checkpoints/step_NNNNNN.ckpt
//!   model.ckpt            lowest-loss checkpoint
//!   train_log.json
//!   generated/{graphrnn,er,ba}.txt
//!   report.json           MMD report per method
//!   nll.json              train and test NLL
//!   run.log
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{fit_ba, fit_er, sample_baseline, BaselineFit};
use crate::checkpoint;
use crate::config::{Auto, ExperimentConfig, ModelSettings};
use crate::datasets::{gen_ba, perturb_edges, split};
use crate::error::{Error, Result};
use crate::eval::{evaluate_sets, EvalParams, MmdReport};
use crate::graph::Graph;
use crate::io::{write_atomic, write_graphs};
use crate::model::GraphRnn;
use crate::nn::{AdamConfig, LrSchedule};
use crate::par;
use crate::sequence::estimate_m;
use crate::train::{fit, TrainConfig, TrainLog, Trainer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MChoice {
    pub m: usize,
    /// `estimated` or `fixed`.
    pub source: String,
    pub trials: usize,
    pub percentile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NllReport {
    pub train_nll: f64,
    pub test_nll: f64,
    pub orderings: usize,
    pub train_graphs: usize,
    pub test_graphs: usize,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub m: usize,
    pub model: GraphRnn,
    pub train_log: TrainLog,
    /// Keyed by `graphrnn`, `er`, `ba`.
    pub reports: BTreeMap<String, MmdReport>,
    pub nll: NllReport,
    pub generated: Vec<Graph>,
}

fn json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidArgument(format!("serialize: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Fixed M or the estimate over `train`.
pub fn choose_m(cfg: &ExperimentConfig, train: &[Graph], seed: u64) -> Result<MChoice> {
    let (m, source) = match cfg.m {
        Auto::Fixed(m) => (m, "fixed"),
        Auto::Auto => (estimate_m(train, cfg.m_trials, cfg.m_percentile, &mut par::rng_from_seed(seed))?, "estimated"),
    };
    Ok(MChoice { m, source: source.into(), trials: cfg.m_trials, percentile: cfg.m_percentile })
}

/// Trains a model on `train`, saving each checkpoint under `ckpt_dir` when given.
pub fn train_model(
    settings: &ModelSettings,
    train_cfg: &TrainConfig,
    m: usize,
    train: &[Graph],
    seed: u64,
    ckpt_dir: Option<&Path>,
) -> Result<(GraphRnn, TrainLog)> {
    let largest = train.iter().map(Graph::n).max().unwrap_or(1);
    let config = settings.resolve(m, largest);
    let mut rng = par::rng_from_seed(seed);
    let model = GraphRnn::new(config, &mut rng)?;
    let mut trainer = Trainer::new(model, train_cfg.adam.clone());
    let log = fit(&mut trainer, train, train_cfg, &mut rng, |step, model| match ckpt_dir {
        Some(dir) => checkpoint::save(&dir.join(format!("step_{step:06}.ckpt")), model),
        None => Ok(()),
    })?;
    Ok((trainer.model, log))
}

/// Runs the full experiment and writes every artifact under `out`.
pub fn run_pipeline(cfg: &ExperimentConfig, out: &Path) -> Result<PipelineResult> {
    cfg.validate()?;
    let mut master = par::rng_from_seed(cfg.seed);
    let seeds = par::child_seeds(&mut master, 8);
    let mut log = String::new();
    writeln!(log, "# resolved configuration").unwrap();
    log.push_str(&cfg.to_text());
    write_atomic(&out.join("config.txt"), cfg.to_text().as_bytes())?;

    let mut spec = cfg.dataset.clone();
    spec.seed = seeds[0];
    let graphs = spec.generate()?;
    write_graphs(&out.join("dataset/graphs.txt"), &graphs)?;
    let sp = split(&graphs, cfg.train_fraction, &mut par::rng_from_seed(seeds[1]))?;
    json(&out.join("dataset/split.json"), &sp)?;
    writeln!(log, "# dataset: {} graphs, {} train, {} test", graphs.len(), sp.train.len(), sp.test.len()).unwrap();

    let m = choose_m(cfg, &sp.train, seeds[2])?;
    json(&out.join("m.json"), &m)?;
    writeln!(log, "# m = {} ({})", m.m, m.source).unwrap();

    let ckpt_dir = out.join("checkpoints");
    let (model, train_log) = train_model(&cfg.model, &cfg.train, m.m, &sp.train, seeds[3], Some(&ckpt_dir))?;
    checkpoint::save(&out.join("model.ckpt"), &model)?;
    json(&out.join("train_log.json"), &train_log)?;
    writeln!(log, "# model: {:?}", model.config()).unwrap();
    writeln!(log, "# parameters: {}", model.num_params()).unwrap();
    match train_log.best_step {
        Some(step) => writeln!(log, "# trained {} steps, best checkpoint at step {step}", cfg.train.steps).unwrap(),
        None => writeln!(log, "# no training steps; model is at its initialization").unwrap(),
    }

    let count = sp.test.len();
    let generated = model.sample_graphs(count, &mut par::rng_from_seed(seeds[4]))?;
    let er = sample_baseline(&BaselineFit::Er(fit_er(&sp.train)?), count, &mut par::rng_from_seed(seeds[5]))?;
    let ba_fit = fit_ba(&sp.train)?;
    let ba = sample_baseline(&BaselineFit::Ba(ba_fit), count, &mut par::rng_from_seed(seeds[6]))?;
    write_graphs(&out.join("generated/graphrnn.txt"), &generated)?;
    write_graphs(&out.join("generated/er.txt"), &er)?;
    write_graphs(&out.join("generated/ba.txt"), &ba)?;

    let mut reports = BTreeMap::new();
    for (name, set) in [("graphrnn", &generated), ("er", &er), ("ba", &ba)] {
        let r = evaluate_sets(&sp.test, set, &cfg.eval)?;
        writeln!(log, "# {name}: degree {:.6e} clustering {:.6e} orbit {:.6e}", r.degree_mmd, r.clustering_mmd, r.orbit_mmd)
            .unwrap();
        reports.insert(name.to_string(), r);
    }
    json(&out.join("report.json"), &reports)?;

    let nll = NllReport {
        train_nll: model.dataset_nll(&sp.train, cfg.nll_orderings, seeds[7])?,
        test_nll: model.dataset_nll(&sp.test, cfg.nll_orderings, seeds[7])?,
        orderings: cfg.nll_orderings,
        train_graphs: sp.train.len(),
        test_graphs: sp.test.len(),
    };
    json(&out.join("nll.json"), &nll)?;
    writeln!(log, "# nll: train {:.6} test {:.6}", nll.train_nll, nll.test_nll).unwrap();
    write_atomic(&out.join("run.log"), log.as_bytes())?;

    Ok(PipelineResult { m: m.m, model, train_log, reports, nll, generated })
}

/// Settings for the edge-perturbation sweep over B-A graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessConfig {
    pub seed: u64,
    pub fractions: Vec<f64>,
    pub nodes: usize,
    pub m_attach: usize,
    pub train_count: usize,
    pub test_count: usize,
    pub m_trials: usize,
    pub m_percentile: f64,
    pub model: ModelSettings,
    pub train: TrainConfig,
    pub eval: EvalParams,
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        let model = ModelSettings {
            graph_layers: 1,
            edge_layers: 1,
            edge_hidden: 8,
            ..ModelSettings::desk(crate::model::Variant::Full)
        };
        Self {
            seed: 0,
            fractions: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            nodes: 100,
            m_attach: 4,
            train_count: 64,
            test_count: 32,
            m_trials: 2000,
            m_percentile: 0.999,
            model,
            train: TrainConfig {
                steps: 800,
                batch_size: 16,
                adam: AdamConfig { schedule: LrSchedule { base_lr: 3e-3, milestones: vec![(600, 1.0 / 3.0)] }, ..AdamConfig::default() },
                checkpoint_every: 100,
            },
            eval: EvalParams::default(),
        }
    }
}

impl RobustnessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fractions.is_empty() || self.fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::Config("fractions must be nonempty and within [0, 1]".into()));
        }
        if self.nodes <= self.m_attach || self.m_attach == 0 {
            return Err(Error::Config("need 0 < m_attach < nodes".into()));
        }
        if self.train_count == 0 || self.test_count == 0 || self.m_trials == 0 {
            return Err(Error::Config("set sizes and m_trials must be at least 1".into()));
        }
        if !(self.m_percentile > 0.0 && self.m_percentile <= 1.0) {
            return Err(Error::Config("m_percentile must lie in (0, 1]".into()));
        }
        self.model.resolve(1, 1).validate().map_err(|e| Error::Config(e.to_string()))?;
        self.train.validate()?;
        self.eval.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub fraction: f64,
    /// `graphrnn`, `er_fit` or `ba_fit`.
    pub method: String,
    pub report: MmdReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessSweep {
    pub fractions: Vec<f64>,
    pub rows: Vec<RobustnessRow>,
}

impl RobustnessSweep {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("fraction,method,degree_mmd,clustering_mmd\n");
        for r in &self.rows {
            writeln!(s, "{},{},{:e},{:e}", r.fraction, r.method, r.report.degree_mmd, r.report.clustering_mmd).unwrap();
        }
        s
    }

    /// Degree MMD of `method` at each fraction, in sweep order.
    pub fn degree_series(&self, method: &str) -> Vec<(f64, f64)> {
        self.rows.iter().filter(|r| r.method == method).map(|r| (r.fraction, r.report.degree_mmd)).collect()
    }
}

fn perturbed_ba_set(cfg: &RobustnessConfig, count: usize, fraction: f64, seed: u64) -> Result<Vec<Graph>> {
    let seeds = par::child_seeds(&mut par::rng_from_seed(seed), count);
    par::map(&seeds, |&s| {
        let mut rng = par::rng_from_seed(s);
        let g = gen_ba(cfg.nodes, cfg.m_attach, &mut rng)?;
        perturb_edges(&g, fraction, &mut rng)
    })
    .into_iter()
    .collect()
}

/// For each fraction: perturbs fresh B-A graphs, trains GraphRNN and fits both
/// baselines on one set, and scores all three against a held-out set.
/// Writes `robustness.csv` and `robustness.json` under `out` when given.
pub fn run_robustness(cfg: &RobustnessConfig, out: Option<&Path>) -> Result<RobustnessSweep> {
    cfg.validate()?;
    let mut master = par::rng_from_seed(cfg.seed);
    let mut rows = Vec::new();
    for &fraction in &cfg.fractions {
        let s = par::child_seeds(&mut master, 6);
        let train = perturbed_ba_set(cfg, cfg.train_count, fraction, s[0])?;
        let test = perturbed_ba_set(cfg, cfg.test_count, fraction, s[1])?;
        let m = estimate_m(&train, cfg.m_trials, cfg.m_percentile, &mut par::rng_from_seed(s[2]))?;
        let (model, _) = train_model(&cfg.model, &cfg.train, m, &train, s[3], None)?;
        let n = cfg.test_count;
        let sets = [
            ("graphrnn", model.sample_graphs(n, &mut par::rng_from_seed(s[4]))?),
            ("er_fit", sample_baseline(&BaselineFit::Er(fit_er(&train)?), n, &mut par::rng_from_seed(s[5]))?),
            ("ba_fit", sample_baseline(&BaselineFit::Ba(fit_ba(&train)?), n, &mut par::rng_from_seed(s[5] ^ 1))?),
        ];
        for (method, set) in sets {
            let report = evaluate_sets(&test, &set, &cfg.eval)?;
            log::info!("fraction {fraction}: {method} degree {:.4e}", report.degree_mmd);
            rows.push(RobustnessRow { fraction, method: method.into(), report });
        }
    }
    let sweep = RobustnessSweep { fractions: cfg.fractions.clone(), rows };
    if let Some(out) = out {
        write_atomic(&out.join("robustness.csv"), sweep.to_csv().as_bytes())?;
        json(&out.join("robustness.json"), &sweep)?;
    }
    Ok(sweep)
}

/// Paths of every regular file under `dir`, sorted.
pub fn list_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| Error::io(&d, e))? {
            let path = entry.map_err(|e| Error::io(&d, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}
