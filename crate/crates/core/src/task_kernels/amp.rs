//! Discriminator objective and style reward.

use serde::{Deserialize, Serialize};

use super::KernelError;

pub const DEFAULT_STYLE_CLAMP: f64 = 1e-4;

fn clamp_score(d: f64, eps: f64) -> f64 {
    d.clamp(eps, 1.0 - eps)
}

/// `−ln(1 − D)` with `D` clamped into `[eps, 1 − eps]`. NaN maps to the
/// lower clamp.
pub fn style_reward(d_score: f64, clamp_eps: f64) -> f64 {
    let d = if d_score.is_nan() {
        clamp_eps
    } else {
        clamp_score(d_score, clamp_eps)
    };
    -(1.0 - d).ln()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Empirical discriminator loss
/// `−E_data[ln D] − E_policy[ln(1 − D)] + w_gp E[‖∇D‖²]`.
///
/// Gradient norms are supplied by the caller.
pub fn discriminator_loss(
    scores_data: &[f64],
    scores_policy: &[f64],
    grad_norms_sq: &[f64],
    w_gp: f64,
    clamp_eps: f64,
) -> Result<f64, KernelError> {
    for (name, batch) in [
        ("data scores", scores_data),
        ("policy scores", scores_policy),
        ("gradient norms", grad_norms_sq),
    ] {
        if batch.is_empty() {
            return Err(KernelError::EmptyBatch(name));
        }
        if batch.iter().any(|x| !x.is_finite()) {
            return Err(KernelError::InvalidState(format!(
                "non-finite value in {name}"
            )));
        }
    }
    if grad_norms_sq.iter().any(|g| *g < 0.0) {
        return Err(KernelError::InvalidState(
            "squared gradient norms must be non-negative".into(),
        ));
    }
    let data: Vec<f64> = scores_data
        .iter()
        .map(|d| clamp_score(*d, clamp_eps).ln())
        .collect();
    let policy: Vec<f64> = scores_policy
        .iter()
        .map(|d| (1.0 - clamp_score(*d, clamp_eps)).ln())
        .collect();
    Ok(-mean(&data) - mean(&policy) + w_gp * mean(grad_norms_sq))
}

/// Linear ramp of the style weight `w^S` between two iterations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StyleWeightSchedule {
    pub start_weight: f64,
    pub end_weight: f64,
    pub start_iter: u64,
    pub end_iter: u64,
}

impl StyleWeightSchedule {
    pub fn constant(w: f64) -> Self {
        Self {
            start_weight: w,
            end_weight: w,
            start_iter: 0,
            end_iter: 0,
        }
    }

    pub fn weight_at(&self, iter: u64) -> f64 {
        if iter <= self.start_iter {
            return self.start_weight;
        }
        if iter >= self.end_iter {
            return self.end_weight;
        }
        let f = (iter - self.start_iter) as f64 / (self.end_iter - self.start_iter) as f64;
        self.start_weight + f * (self.end_weight - self.start_weight)
    }
}
