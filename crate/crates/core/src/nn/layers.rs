//! Affine layers and multi-layer perceptrons.

use rand::Rng;

use super::ops::{gemv_acc, gemv_t_acc, outer_acc, sigmoid};
use super::params::{ParamSet, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Linear {
    pub w: Tensor,
    pub b: Tensor,
}

impl Linear {
    /// Allocates `name.w` (`output x input`) and `name.b`.
    pub fn alloc(ps: &mut ParamSet, name: &str, input: usize, output: usize) -> Self {
        let w = ps.alloc(format!("{name}.w"), output, input);
        let b = ps.alloc(format!("{name}.b"), output, 1);
        Self { w, b }
    }

    /// Weights uniform in `±1/sqrt(fan_in)`, biases zero.
    pub fn init<R: Rng + ?Sized>(&self, ps: &mut ParamSet, rng: &mut R) {
        ps.fill_uniform(self.w, 1.0 / (self.input() as f64).sqrt(), rng);
    }

    pub fn input(&self) -> usize {
        self.w.cols
    }

    pub fn output(&self) -> usize {
        self.w.rows
    }

    /// `y = W x + b`
    pub fn forward(&self, p: &[f64], x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(self.b.of(p));
        gemv_acc(self.w.of(p), x, y);
    }

    /// Accumulates parameter gradients and, when requested, `dx += W^T dy`.
    pub fn backward(&self, p: &[f64], g: &mut [f64], x: &[f64], dy: &[f64], dx: Option<&mut [f64]>) {
        outer_acc(self.w.of_mut(g), dy, x);
        for (gb, d) in self.b.of_mut(g).iter_mut().zip(dy) {
            *gb += d;
        }
        if let Some(dx) = dx {
            gemv_t_acc(self.w.of(p), dy, dx);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    fn apply(self, y: &mut [f64]) {
        match self {
            Activation::Relu => y.iter_mut().for_each(|v| *v = v.max(0.0)),
            Activation::Sigmoid => y.iter_mut().for_each(|v| *v = sigmoid(*v)),
            Activation::Identity => {}
        }
    }

    /// Turns a gradient w.r.t. the activation output into one w.r.t. its input.
    fn backprop(self, out: &[f64], d: &mut [f64]) {
        match self {
            Activation::Relu => d.iter_mut().zip(out).for_each(|(d, &o)| {
                if o <= 0.0 {
                    *d = 0.0
                }
            }),
            Activation::Sigmoid => d.iter_mut().zip(out).for_each(|(d, &o)| *d *= o * (1.0 - o)),
            Activation::Identity => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mlp {
    pub layers: Vec<(Linear, Activation)>,
}

/// Activations recorded by [`Mlp::forward_cached`]: the input followed by
/// every layer's post-activation output.
#[derive(Debug, Clone, Default)]
pub struct MlpCache {
    pub acts: Vec<Vec<f64>>,
}

impl MlpCache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("forward_cached was run")
    }
}

impl Mlp {
    /// `dims = [in, h1, ..., out]` with one activation per layer.
    pub fn alloc(ps: &mut ParamSet, name: &str, dims: &[usize], acts: &[Activation]) -> Self {
        assert_eq!(dims.len(), acts.len() + 1, "one activation per layer");
        let layers = dims
            .windows(2)
            .zip(acts)
            .enumerate()
            .map(|(k, (d, &a))| (Linear::alloc(ps, &format!("{name}.{k}"), d[0], d[1]), a))
            .collect();
        Self { layers }
    }

    pub fn init<R: Rng + ?Sized>(&self, ps: &mut ParamSet, rng: &mut R) {
        for (l, _) in &self.layers {
            l.init(ps, rng);
        }
    }

    pub fn input(&self) -> usize {
        self.layers[0].0.input()
    }

    pub fn output(&self) -> usize {
        self.layers.last().unwrap().0.output()
    }

    pub fn forward(&self, p: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input() {
            return Err(Error::Shape(format!("MLP input {} != {}", x.len(), self.input())));
        }
        let mut cache = MlpCache::default();
        self.forward_cached(p, x, &mut cache);
        Ok(cache.acts.pop().unwrap())
    }

    pub fn forward_cached(&self, p: &[f64], x: &[f64], cache: &mut MlpCache) {
        cache.acts.resize_with(self.layers.len() + 1, Vec::new);
        cache.acts[0].clear();
        cache.acts[0].extend_from_slice(x);
        for (k, (lin, act)) in self.layers.iter().enumerate() {
            let (prev, rest) = cache.acts.split_at_mut(k + 1);
            let y = &mut rest[0];
            y.resize(lin.output(), 0.0);
            lin.forward(p, &prev[k], y);
            act.apply(y);
        }
    }

    /// Backpropagates `dout` (gradient w.r.t. the final output) and accumulates
    /// `dx` when given.
    pub fn backward(&self, p: &[f64], g: &mut [f64], cache: &MlpCache, dout: &[f64], mut dx: Option<&mut [f64]>) {
        let mut d = dout.to_vec();
        for (k, (lin, act)) in self.layers.iter().enumerate().rev() {
            act.backprop(&cache.acts[k + 1], &mut d);
            if k == 0 {
                lin.backward(p, g, &cache.acts[0], &d, dx.as_deref_mut());
            } else {
                let mut prev = vec![0.0; lin.input()];
                lin.backward(p, g, &cache.acts[k], &d, Some(&mut prev));
                d = prev;
            }
        }
    }
}
