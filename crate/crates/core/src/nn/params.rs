//! Flat parameter storage with named, shaped views.
//!
//! Every learnable array lives in one contiguous `Vec<f64>`, so optimizers,
//! gradient checks and checkpoints can treat the model as a single vector.

use rand::Rng;

use crate::error::{Error, Result};

/// A `rows x cols` row-major view into a flat buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tensor {
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Tensor {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn of<'a>(&self, buf: &'a [f64]) -> &'a [f64] {
        &buf[self.offset..self.offset + self.len()]
    }

    pub fn of_mut<'a>(&self, buf: &'a mut [f64]) -> &'a mut [f64] {
        &mut buf[self.offset..self.offset + self.len()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamEntry {
    pub name: String,
    pub tensor: Tensor,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamSet {
    entries: Vec<ParamEntry>,
    data: Vec<f64>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a zero-initialized array. Consecutive allocations are contiguous.
    pub fn alloc(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> Tensor {
        let tensor = Tensor { offset: self.data.len(), rows, cols };
        self.data.resize(self.data.len() + rows * cols, 0.0);
        self.entries.push(ParamEntry { name: name.into(), tensor });
        tensor
    }

    pub fn entries(&self) -> &[ParamEntry] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&ParamEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Replaces the whole buffer; the length must match.
    pub fn set_data(&mut self, data: Vec<f64>) -> Result<()> {
        if data.len() != self.data.len() {
            return Err(Error::Shape(format!("expected {} parameters, got {}", self.data.len(), data.len())));
        }
        self.data = data;
        Ok(())
    }

    pub fn fill_uniform<R: Rng + ?Sized>(&mut self, t: Tensor, bound: f64, rng: &mut R) {
        for x in t.of_mut(&mut self.data) {
            *x = rng.gen_range(-bound..=bound);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}
