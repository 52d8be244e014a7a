//! Stacked GRU cells with full backpropagation through time.
//!
//! Per layer and step:
//!
//! ```text
//! z  = sigmoid(W_z x + U_z h + b_z)
//! r  = sigmoid(W_r x + U_r h + b_r)
//! h~ = tanh(W_h x + U_h (r * h) + b_h)
//! h' = (1 - z) * h + z * h~
//! ```
//!
//! The three input matrices are allocated back to back so they form a single
//! `3H x D` block (likewise `U` and `b`), letting one matrix-vector product
//! serve all gates.

use rand::Rng;

use super::ops::{axpy, gemv_acc, gemv_t_acc, outer_acc, sigmoid};
use super::params::{ParamSet, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GruLayer {
    /// `[W_z; W_r; W_h]`, `3H x D`
    pub w: Tensor,
    /// `[U_z; U_r; U_h]`, `3H x H`
    pub u: Tensor,
    /// `[b_z; b_r; b_h]`
    pub b: Tensor,
    pub input: usize,
    pub hidden: usize,
}

impl GruLayer {
    pub fn alloc(ps: &mut ParamSet, name: &str, input: usize, hidden: usize) -> Self {
        let block = |ps: &mut ParamSet, kind: &str, cols: usize| {
            let first = ps.alloc(format!("{name}.{kind}_z"), hidden, cols);
            ps.alloc(format!("{name}.{kind}_r"), hidden, cols);
            ps.alloc(format!("{name}.{kind}_h"), hidden, cols);
            Tensor { offset: first.offset, rows: 3 * hidden, cols }
        };
        let w = block(ps, "w", input);
        let u = block(ps, "u", hidden);
        let b = block(ps, "b", 1);
        Self { w, u, b, input, hidden }
    }

    pub fn init<R: Rng + ?Sized>(&self, ps: &mut ParamSet, rng: &mut R) {
        ps.fill_uniform(self.w, 1.0 / (self.input as f64).sqrt(), rng);
        ps.fill_uniform(self.u, 1.0 / (self.hidden as f64).sqrt(), rng);
    }

    /// One forward step writing gate activations into `z`, `r`, `hh` and the
    /// new state into `h_new`.
    #[allow(clippy::too_many_arguments)]
    pub fn forward(&self, p: &[f64], x: &[f64], h: &[f64], z: &mut [f64], r: &mut [f64], hh: &mut [f64], h_new: &mut [f64]) {
        let hd = self.hidden;
        let u = self.u.of(p);
        let mut a = self.b.of(p).to_vec();
        gemv_acc(self.w.of(p), x, &mut a);
        gemv_acc(&u[..2 * hd * hd], h, &mut a[..2 * hd]);
        for k in 0..hd {
            z[k] = sigmoid(a[k]);
            r[k] = sigmoid(a[hd + k]);
        }
        let rh: Vec<f64> = r.iter().zip(h).map(|(r, h)| r * h).collect();
        let ah = &mut a[2 * hd..];
        gemv_acc(&u[2 * hd * hd..], &rh, ah);
        for k in 0..hd {
            hh[k] = ah[k].tanh();
            h_new[k] = h[k] + z[k] * (hh[k] - h[k]);
        }
    }

    /// Backward through one step. `dh_new` is the total gradient reaching the
    /// new state; gradients are accumulated into `g`, `dx` and `dh_prev`.
    #[allow(clippy::too_many_arguments)]
    pub fn backward(
        &self,
        p: &[f64],
        g: &mut [f64],
        x: &[f64],
        h: &[f64],
        z: &[f64],
        r: &[f64],
        hh: &[f64],
        dh_new: &[f64],
        dx: &mut [f64],
        dh_prev: &mut [f64],
    ) {
        let hd = self.hidden;
        let u = self.u.of(p);
        let mut da = vec![0.0; 3 * hd];
        for k in 0..hd {
            let dz = dh_new[k] * (hh[k] - h[k]);
            let dhh = dh_new[k] * z[k];
            dh_prev[k] += dh_new[k] * (1.0 - z[k]);
            da[k] = dz * z[k] * (1.0 - z[k]);
            da[2 * hd + k] = dhh * (1.0 - hh[k] * hh[k]);
        }
        let rh: Vec<f64> = r.iter().zip(h).map(|(r, h)| r * h).collect();
        let mut drh = vec![0.0; hd];
        gemv_t_acc(&u[2 * hd * hd..], &da[2 * hd..], &mut drh);
        for k in 0..hd {
            dh_prev[k] += drh[k] * r[k];
            let dr = drh[k] * h[k];
            da[hd + k] = dr * r[k] * (1.0 - r[k]);
        }
        {
            let gu = self.u.of_mut(g);
            let (gu_zr, gu_h) = gu.split_at_mut(2 * hd * hd);
            outer_acc(gu_h, &da[2 * hd..], &rh);
            outer_acc(gu_zr, &da[..2 * hd], h);
        }
        gemv_t_acc(&u[..2 * hd * hd], &da[..2 * hd], dh_prev);
        outer_acc(self.w.of_mut(g), &da, x);
        axpy(1.0, &da, self.b.of_mut(g));
        gemv_t_acc(self.w.of(p), &da, dx);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GruStack {
    pub layers: Vec<GruLayer>,
}

impl GruStack {
    pub fn alloc(ps: &mut ParamSet, name: &str, input: usize, hidden: usize, depth: usize) -> Self {
        assert!(depth >= 1);
        let layers = (0..depth)
            .map(|l| GruLayer::alloc(ps, &format!("{name}.{l}"), if l == 0 { input } else { hidden }, hidden))
            .collect();
        Self { layers }
    }

    pub fn init<R: Rng + ?Sized>(&self, ps: &mut ParamSet, rng: &mut R) {
        for l in &self.layers {
            l.init(ps, rng);
        }
    }

    pub fn input(&self) -> usize {
        self.layers[0].input
    }

    pub fn hidden(&self) -> usize {
        self.layers.last().unwrap().hidden
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// One step of the whole stack; returns the new per-layer states.
    pub fn step(&self, p: &[f64], h_prev: &[Vec<f64>], x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if h_prev.len() != self.layers.len() {
            return Err(Error::Shape(format!("{} hidden states for {} layers", h_prev.len(), self.layers.len())));
        }
        if x.len() != self.input() {
            return Err(Error::Shape(format!("GRU input {} != {}", x.len(), self.input())));
        }
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            if h_prev[l].len() != layer.hidden {
                return Err(Error::Shape(format!("layer {l} state {} != {}", h_prev[l].len(), layer.hidden)));
            }
            let hd = layer.hidden;
            let (mut z, mut r, mut hh, mut h_new) = (vec![0.0; hd], vec![0.0; hd], vec![0.0; hd], vec![0.0; hd]);
            let input = if l == 0 { x } else { &out[l - 1] };
            layer.forward(p, input, &h_prev[l], &mut z, &mut r, &mut hh, &mut h_new);
            out.push(h_new);
        }
        Ok(out)
    }
}

/// Recorded activations of a [`GruStack`] unrolled over `T` steps.
#[derive(Debug, Clone, Default)]
pub struct GruTrace {
    steps: usize,
    hidden: Vec<usize>,
    /// Per layer: states `h_0 ..= h_T`, flattened.
    h: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
    hh: Vec<Vec<f64>>,
}

impl GruTrace {
    /// Runs `stack` over `inputs` (`T x D`, flattened) from the initial
    /// states `init` (one per layer).
    pub fn forward(stack: &GruStack, p: &[f64], init: &[&[f64]], inputs: &[f64]) -> Self {
        let d = stack.input();
        let steps = inputs.len() / d;
        let depth = stack.depth();
        let mut tr = GruTrace { steps, hidden: stack.layers.iter().map(|l| l.hidden).collect(), ..Default::default() };
        let mut below: Vec<f64> = Vec::with_capacity(d.max(stack.hidden()));
        for layer in &stack.layers {
            let hd = layer.hidden;
            tr.h.push(vec![0.0; (steps + 1) * hd]);
            tr.z.push(vec![0.0; steps * hd]);
            tr.r.push(vec![0.0; steps * hd]);
            tr.hh.push(vec![0.0; steps * hd]);
        }
        for l in 0..depth {
            tr.h[l][..stack.layers[l].hidden].copy_from_slice(init[l]);
        }
        for t in 0..steps {
            for (l, layer) in stack.layers.iter().enumerate() {
                let hd = layer.hidden;
                let span = t * hd..(t + 1) * hd;
                if l == 0 {
                    below.clear();
                    below.extend_from_slice(&inputs[t * d..(t + 1) * d]);
                }
                let (before, after) = tr.h[l].split_at_mut((t + 1) * hd);
                let h_prev = &before[t * hd..];
                let h_new = &mut after[..hd];
                layer.forward(
                    p,
                    &below,
                    h_prev,
                    &mut tr.z[l][span.clone()],
                    &mut tr.r[l][span.clone()],
                    &mut tr.hh[l][span],
                    h_new,
                );
                below.clear();
                below.extend_from_slice(h_new);
            }
        }
        tr
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// State of `layer` after step `t` (0-based), i.e. `h_{t+1}`.
    pub fn output(&self, layer: usize, t: usize) -> &[f64] {
        let hd = self.hidden[layer];
        &self.h[layer][(t + 1) * hd..(t + 2) * hd]
    }

    /// Top-layer state after step `t`.
    pub fn top(&self, t: usize) -> &[f64] {
        self.output(self.h.len() - 1, t)
    }

    /// BPTT. `d_top` (`T x H_top`) holds gradients w.r.t. each top-layer
    /// output. Accumulates parameter gradients into `g`, input gradients into
    /// `d_inputs` when given, and returns gradients w.r.t. the initial states.
    pub fn backward(
        &self,
        stack: &GruStack,
        p: &[f64],
        g: &mut [f64],
        inputs: &[f64],
        d_top: &[f64],
        mut d_inputs: Option<&mut [f64]>,
    ) -> Vec<Vec<f64>> {
        let d = stack.input();
        let depth = stack.depth();
        let top_h = stack.hidden();
        let mut carry: Vec<Vec<f64>> = stack.layers.iter().map(|l| vec![0.0; l.hidden]).collect();
        let mut from_above: Vec<f64> = Vec::new();
        for t in (0..self.steps).rev() {
            for l in (0..depth).rev() {
                let layer = &stack.layers[l];
                let hd = layer.hidden;
                let mut dh_new = std::mem::replace(&mut carry[l], vec![0.0; hd]);
                if l == depth - 1 {
                    axpy(1.0, &d_top[t * top_h..(t + 1) * top_h], &mut dh_new);
                } else {
                    axpy(1.0, &from_above, &mut dh_new);
                }
                let input: &[f64] = if l == 0 {
                    &inputs[t * d..(t + 1) * d]
                } else {
                    let below = stack.layers[l - 1].hidden;
                    &self.h[l - 1][(t + 1) * below..(t + 2) * below]
                };
                let mut dx = vec![0.0; layer.input];
                let span = t * hd..(t + 1) * hd;
                layer.backward(
                    p,
                    g,
                    input,
                    &self.h[l][t * hd..(t + 1) * hd],
                    &self.z[l][span.clone()],
                    &self.r[l][span.clone()],
                    &self.hh[l][span],
                    &dh_new,
                    &mut dx,
                    &mut carry[l],
                );
                if l == 0 {
                    if let Some(di) = d_inputs.as_deref_mut() {
                        axpy(1.0, &dx, &mut di[t * d..(t + 1) * d]);
                    }
                } else {
                    from_above = dx;
                }
            }
        }
        carry
    }
}
