//! Minibatch maximum-likelihood training.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{random_bfs_sequence, GraphRnn};
use crate::nn::{Adam, AdamConfig};
use crate::par;
use crate::sequence::GraphSequence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub steps: u64,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Keep a checkpoint every this many steps (and at the last step).
    pub checkpoint_every: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { steps: 3000, batch_size: 32, adam: AdamConfig::default(), checkpoint_every: 500 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::Config("checkpoint_every must be at least 1".into()));
        }
        if !(self.adam.schedule.base_lr > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// A model together with its optimizer state.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub model: GraphRnn,
    pub adam: Adam,
}

impl Trainer {
    pub fn new(model: GraphRnn, adam: AdamConfig) -> Self {
        let adam = Adam::new(adam, model.num_params());
        Self { model, adam }
    }

    /// One optimizer step on `batch`; returns the mean per-sequence loss.
    ///
    /// Per-sequence gradients are computed in parallel and summed in batch
    /// order. Fails with [`Error::NonFinite`] if the loss, a gradient or an
    /// updated parameter is NaN or infinite.
    pub fn train_step(&mut self, batch: &[GraphSequence]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let m = self.model.config().m_width;
        if let Some(s) = batch.iter().find(|s| s.m_width() != m) {
            return Err(Error::WidthMismatch { expected: m, got: s.m_width() });
        }
        let model = &self.model;
        let parts = par::map(batch, |s| model.loss_and_grad(s));
        let mut loss = 0.0;
        let mut grad = vec![0.0; model.num_params()];
        for part in parts {
            let (l, g) = part?;
            loss += l;
            grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        }
        let scale = 1.0 / batch.len() as f64;
        loss *= scale;
        grad.iter_mut().for_each(|g| *g *= scale);
        let step = self.adam.t + 1;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("loss at step {step}")));
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("gradient at step {step}")));
        }
        self.adam.step(self.model.params_mut().data_mut(), &grad)?;
        if !self.model.params().all_finite() {
            return Err(Error::NonFinite(format!("parameters after step {step}")));
        }
        Ok(loss)
    }
}

/// Cycles through a graph list in reshuffled epochs.
#[derive(Debug, Clone)]
pub struct EpochSampler {
    order: Vec<usize>,
    pos: usize,
}

impl EpochSampler {
    pub fn new(len: usize) -> Self {
        Self { order: (0..len).collect(), pos: len }
    }

    pub fn next_index<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        if self.pos == self.order.len() {
            self.order.shuffle(rng);
            self.pos = 0;
        }
        self.pos += 1;
        self.order[self.pos - 1]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointRecord {
    pub step: u64,
    /// Mean training loss over the steps since the previous checkpoint.
    pub window_loss: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainLog {
    pub losses: Vec<f64>,
    pub checkpoints: Vec<CheckpointRecord>,
    /// Checkpoint with the lowest window loss, if any steps ran.
    pub best_step: Option<u64>,
}

/// Trains on `graphs`, pairing every graph with a fresh random BFS ordering
/// each time it is drawn. `on_checkpoint` sees every retained checkpoint;
/// on return the trainer holds the parameters of the best one.
pub fn fit<R, F>(trainer: &mut Trainer, graphs: &[Graph], cfg: &TrainConfig, rng: &mut R, mut on_checkpoint: F) -> Result<TrainLog>
where
    R: Rng + ?Sized,
    F: FnMut(u64, &GraphRnn) -> Result<()>,
{
    cfg.validate()?;
    if graphs.is_empty() {
        return Err(Error::InvalidArgument("no training graphs".into()));
    }
    let m = trainer.model.config().m_width;
    let mut sampler = EpochSampler::new(graphs.len());
    let mut log = TrainLog { losses: Vec::with_capacity(cfg.steps as usize), checkpoints: Vec::new(), best_step: None };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut window = (0.0, 0u64);

    for step in 1..=cfg.steps {
        let batch: Vec<GraphSequence> = (0..cfg.batch_size)
            .map(|_| random_bfs_sequence(&graphs[sampler.next_index(rng)], m, rng))
            .collect();
        let loss = trainer.train_step(&batch)?;
        log.losses.push(loss);
        window.0 += loss;
        window.1 += 1;
        if step % 100 == 0 {
            log::info!("step {step}: loss {loss:.4}");
        }
        if step % cfg.checkpoint_every == 0 || step == cfg.steps {
            let window_loss = window.0 / window.1 as f64;
            window = (0.0, 0);
            on_checkpoint(step, &trainer.model)?;
            log.checkpoints.push(CheckpointRecord { step, window_loss });
            if best.as_ref().is_none_or(|(b, _)| window_loss < *b) {
                best = Some((window_loss, trainer.model.params().data().to_vec()));
                log.best_step = Some(step);
            }
        }
    }
    if let Some((_, params)) = best {
        trainer.model.params_mut().set_data(params)?;
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeOrdering;
    use crate::model::{ModelConfig, Variant};
    use crate::nn::LrSchedule;
    use crate::sequence::encode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(variant: Variant) -> ModelConfig {
        ModelConfig {
            variant,
            m_width: 3,
            embed_dim: 4,
            graph_layers: 1,
            graph_hidden: 8,
            edge_layers: 1,
            edge_hidden: 4,
            edge_mlp_hidden: 4,
            max_nodes: 10,
        }
    }

    #[test]
    fn rejects_empty_batch_and_width_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut t = Trainer::new(GraphRnn::new(cfg(Variant::Simple), &mut rng).unwrap(), AdamConfig::default());
        assert!(t.train_step(&[]).is_err());
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let seq = encode(&g, &NodeOrdering::identity(3), 2).unwrap().seq;
        assert!(matches!(t.train_step(&[seq]), Err(Error::WidthMismatch { .. })));
    }

    #[test]
    fn loss_decreases_on_repeated_sequence() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let seq = encode(&g, &NodeOrdering::identity(4), 3).unwrap().seq;
        for variant in [Variant::Simple, Variant::Full] {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let adam = AdamConfig { schedule: LrSchedule::constant(1e-2), ..Default::default() };
            let mut t = Trainer::new(GraphRnn::new(cfg(variant), &mut rng).unwrap(), adam);
            let first = t.train_step(std::slice::from_ref(&seq)).unwrap();
            let mut last = first;
            for _ in 0..100 {
                last = t.train_step(std::slice::from_ref(&seq)).unwrap();
            }
            assert!(last < 0.5 * first, "{variant}: {first} -> {last}");
        }
    }

    #[test]
    fn watchdog_reports_non_finite_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut t = Trainer::new(GraphRnn::new(cfg(Variant::Simple), &mut rng).unwrap(), AdamConfig::default());
        t.model.params_mut().data_mut()[0] = f64::NAN;
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let seq = encode(&g, &NodeOrdering::identity(3), 3).unwrap().seq;
        assert!(matches!(t.train_step(&[seq]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn epochs_visit_every_graph_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = EpochSampler::new(7);
        for _ in 0..3 {
            let mut seen: Vec<usize> = (0..7).map(|_| s.next_index(&mut rng)).collect();
            seen.sort();
            assert_eq!(seen, (0..7).collect::<Vec<_>>());
        }
    }

    #[test]
    fn fit_keeps_best_checkpoint_and_is_deterministic() {
        let graphs: Vec<Graph> = (3..7).map(|n| crate::datasets::gen_ladder(n).unwrap()).collect();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let model = GraphRnn::new(ModelConfig { m_width: 4, max_nodes: 20, ..cfg(Variant::Full) }, &mut rng).unwrap();
            let tc = TrainConfig { steps: 30, batch_size: 4, checkpoint_every: 10, ..Default::default() };
            let mut t = Trainer::new(model, tc.adam.clone());
            let mut seen = Vec::new();
            let log = fit(&mut t, &graphs, &tc, &mut rng, |s, _| {
                seen.push(s);
                Ok(())
            })
            .unwrap();
            (log, seen, t.model.params().data().to_vec())
        };
        let (log, seen, params) = run();
        assert_eq!(seen, vec![10, 20, 30]);
        assert_eq!(log.losses.len(), 30);
        let best = log.checkpoints.iter().min_by(|a, b| a.window_loss.total_cmp(&b.window_loss)).unwrap();
        assert_eq!(log.best_step, Some(best.step));
        assert_eq!(run().2, params);
    }
}
