//! Minimal neural-network substrate: dense layers, stacked GRUs, masked binary
//! cross-entropy, Adam and finite-difference checking, all over `f64`.

pub mod adam;
pub mod gradcheck;
pub mod gru;
pub mod layers;
pub mod loss;
pub mod ops;
pub mod params;

pub use adam::{Adam, AdamConfig, LrSchedule};
pub use gradcheck::{grad_check, GradCheckReport};
pub use gru::{GruLayer, GruStack, GruTrace};
pub use layers::{Activation, Linear, Mlp, MlpCache};
pub use loss::{bce_grad, bce_loss};
pub use params::{ParamSet, Tensor};
