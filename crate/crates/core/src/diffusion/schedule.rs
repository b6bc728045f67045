use serde::{Deserialize, Serialize};

use super::DiffusionError;
use crate::matrix::Matrix;

pub const DEFAULT_STEPS: usize = 30;
pub const DEFAULT_BETA_MIN: f64 = 0.05;
pub const DEFAULT_BETA_MAX: f64 = 20.0;

/// Variance-preserving schedule with linear `beta(t)` on `[0, 1]`, sampled on
/// a uniform grid of `n_steps` intervals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    pub n_steps: usize,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        Self {
            n_steps: DEFAULT_STEPS,
            beta_min: DEFAULT_BETA_MIN,
            beta_max: DEFAULT_BETA_MAX,
        }
    }
}

impl NoiseSchedule {
    pub fn beta(&self, t: f64) -> f64 {
        self.beta_min + t * (self.beta_max - self.beta_min)
    }

    /// Signal retention `exp(-0.5 * integral_0^t beta)`.
    pub fn alpha(&self, t: f64) -> f64 {
        let integral = t * self.beta_min + 0.5 * t * t * (self.beta_max - self.beta_min);
        (-0.5 * integral).exp()
    }

    pub fn sigma(&self, t: f64) -> f64 {
        let a = self.alpha(t);
        (1.0 - a * a).max(0.0).sqrt()
    }

    pub fn grid_time(&self, i: usize) -> f64 {
        i as f64 / self.n_steps as f64
    }

    pub fn grid_alphas(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|i| self.alpha(self.grid_time(i))).collect()
    }
}

pub fn make_schedule(n_steps: usize, beta_min: f64, beta_max: f64) -> Result<NoiseSchedule, DiffusionError> {
    if n_steps == 0 {
        return Err(DiffusionError::BadSchedule("n_steps must be at least 1".into()));
    }
    if !(beta_min > 0.0 && beta_min < beta_max && beta_max.is_finite()) {
        return Err(DiffusionError::BadSchedule(format!(
            "need 0 < beta_min < beta_max, got [{beta_min}, {beta_max}]"
        )));
    }
    let sched = NoiseSchedule {
        n_steps,
        beta_min,
        beta_max,
    };
    let terminal = sched.alpha(1.0);
    if terminal > 0.01 {
        return Err(DiffusionError::BadSchedule(format!(
            "alpha(1) = {terminal} leaves too much signal (must be <= 0.01)"
        )));
    }
    Ok(sched)
}

/// `x_t = alpha x0 + (1 - alpha) prior + sqrt(1 - alpha^2) eps`.
pub fn forward_diffuse(
    x0: &Matrix,
    prior: &Matrix,
    t: f64,
    eps: &Matrix,
    sched: &NoiseSchedule,
) -> Result<Matrix, DiffusionError> {
    if x0.shape() != prior.shape() || x0.shape() != eps.shape() {
        return Err(DiffusionError::ShapeMismatch(format!(
            "x0 {:?}, prior {:?}, eps {:?}",
            x0.shape(),
            prior.shape(),
            eps.shape()
        )));
    }
    let a = sched.alpha(t);
    let s = sched.sigma(t);
    Ok(Matrix::from_fn(x0.rows(), x0.cols(), |r, c| {
        a * x0[(r, c)] + (1.0 - a) * prior[(r, c)] + s * eps[(r, c)]
    }))
}
