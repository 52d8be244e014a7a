//! Masked binary cross-entropy.

use super::ops::{sigmoid, softplus};
use crate::error::{Error, Result};

/// Floor applied inside logarithms.
pub const LOG_EPS: f64 = 1e-12;

fn check_shapes(pred: &[f64], target: &[f64], mask: &[f64]) -> Result<()> {
    if pred.len() != target.len() || pred.len() != mask.len() {
        return Err(Error::Shape(format!(
            "bce: pred {}, target {}, mask {}",
            pred.len(),
            target.len(),
            mask.len()
        )));
    }
    Ok(())
}

/// `-sum mask * (t ln p + (1 - t) ln(1 - p))`, summed over positions, with
/// logarithms floored at `ln(1e-12)`.
pub fn bce_loss(pred: &[f64], target: &[f64], mask: &[f64]) -> Result<f64> {
    check_shapes(pred, target, mask)?;
    Ok(pred
        .iter()
        .zip(target)
        .zip(mask)
        .map(|((&p, &t), &m)| {
            if m == 0.0 {
                return 0.0;
            }
            let lp = p.max(LOG_EPS).ln();
            let lq = (1.0 - p).max(LOG_EPS).ln();
            -m * (t * lp + (1.0 - t) * lq)
        })
        .sum())
}

/// Gradient of [`bce_loss`] with respect to `pred`.
pub fn bce_grad(pred: &[f64], target: &[f64], mask: &[f64]) -> Result<Vec<f64>> {
    check_shapes(pred, target, mask)?;
    Ok(pred
        .iter()
        .zip(target)
        .zip(mask)
        .map(|((&p, &t), &m)| {
            let dp = if p > LOG_EPS { -t / p } else { 0.0 };
            let dq = if 1.0 - p > LOG_EPS { (1.0 - t) / (1.0 - p) } else { 0.0 };
            m * (dp + dq)
        })
        .collect())
}

/// `ln P(bit)` for a Bernoulli with logit `z`, floored at `ln(1e-12)`.
#[inline]
pub fn log_prob_bit(z: f64, bit: bool) -> f64 {
    let nll = if bit { softplus(-z) } else { softplus(z) };
    -nll.min(-LOG_EPS.ln())
}

/// Loss and logit gradient for one bit. The gradient is zero where the log
/// floor is active, matching [`bce_loss`].
#[inline]
pub fn bce_logit(z: f64, bit: bool) -> (f64, f64) {
    let cap = -LOG_EPS.ln();
    let raw = if bit { softplus(-z) } else { softplus(z) };
    if raw >= cap {
        (cap, 0.0)
    } else {
        (raw, sigmoid(z) - if bit { 1.0 } else { 0.0 })
    }
}
