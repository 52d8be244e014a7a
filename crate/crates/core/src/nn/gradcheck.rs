//! Central finite-difference gradient checking.

use rand::seq::index;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_rel_error: f64,
    pub worst_index: usize,
    pub tol: f64,
    pub passed: bool,
}

/// Magnitudes below this are compared in absolute terms.
const REL_FLOOR: f64 = 1e-5;

/// Compares `analytic` against central differences of `loss` on a random
/// subsample of at least `min_coords` coordinates (all of them when fewer).
pub fn grad_check<F, R>(
    loss: F,
    params: &[f64],
    analytic: &[f64],
    min_coords: usize,
    step: f64,
    tol: f64,
    rng: &mut R,
) -> GradCheckReport
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    assert_eq!(params.len(), analytic.len());
    let coords: Vec<usize> = if params.len() <= min_coords {
        (0..params.len()).collect()
    } else {
        let mut v = index::sample(rng, params.len(), min_coords).into_vec();
        v.sort_unstable();
        v
    };
    let mut p = params.to_vec();
    let mut worst = (0.0f64, 0usize);
    for &i in &coords {
        let orig = p[i];
        p[i] = orig + step;
        let up = loss(&p);
        p[i] = orig - step;
        let down = loss(&p);
        p[i] = orig;
        let numeric = (up - down) / (2.0 * step);
        let denom = numeric.abs().max(analytic[i].abs()).max(REL_FLOOR);
        let rel = (numeric - analytic[i]).abs() / denom;
        if rel > worst.0 || rel.is_nan() {
            worst = (rel, i);
        }
    }
    GradCheckReport {
        checked: coords.len(),
        max_rel_error: worst.0,
        worst_index: worst.1,
        tol,
        passed: worst.0 < tol,
    }
}
