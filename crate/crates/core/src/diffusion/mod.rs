//! Toy diffusion decoder: variance-preserving noising toward the average-mel
//! prior, a convolutional noise predictor trained with plain gradient
//! descent, and grid-based reverse sampling.
//!
//! The network operates on normalised log-mel values (see [`MelNorm`]); the
//! checkpoint stores the statistics so inference can map back.

mod checkpoint;
mod decoder;
mod gradcheck;
mod sampler;
mod schedule;
mod train;

use std::path::PathBuf;

use thiserror::Error;

use crate::conditioning::CondError;
use crate::matrix::Matrix;

pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use decoder::{noise_loss, predict_noise, DecoderParams};
pub use gradcheck::{check_gradients, gradient_check, GradCheckReport};
pub use sampler::{decoder_denoiser, reverse_sample};
pub use schedule::{
    forward_diffuse, make_schedule, NoiseSchedule, DEFAULT_BETA_MAX, DEFAULT_BETA_MIN, DEFAULT_STEPS,
};
pub use train::{draw_noise, example_loss, train_step, train_step_with, NoiseDraw, TrainExample};

#[derive(Debug, Error)]
pub enum DiffusionError {
    #[error("BadSchedule: {0}")]
    BadSchedule(String),
    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),
    #[error("NonFiniteLoss: training loss became {0}")]
    NonFiniteLoss(f64),
    #[error("EmptyBatch: training batch has no examples")]
    EmptyBatch,
    #[error(transparent)]
    Cond(#[from] CondError),
    #[error("BadCheckpoint: {0}")]
    BadCheckpoint(String),
    #[error("UnreadableFile: {path}: {reason}")]
    UnreadableFile { path: PathBuf, reason: String },
    #[error("UnwritableFile: {path}: {reason}")]
    UnwritableFile { path: PathBuf, reason: String },
}

/// Affine map between log-mel values and the network's working space:
/// per-band mean removal and one shared scale.
#[derive(Clone, Debug, PartialEq)]
pub struct MelNorm {
    pub mean: Vec<f64>,
    pub scale: f64,
}

const MIN_NORM_SCALE: f64 = 1e-3;

impl MelNorm {
    pub fn identity(n_mels: usize) -> Self {
        Self {
            mean: vec![0.0; n_mels],
            scale: 1.0,
        }
    }

    /// Statistics pooled over every frame of every matrix; normalised values
    /// have standard deviation `target_std`.
    pub fn fit<'a>(
        mels: impl IntoIterator<Item = &'a Matrix>,
        target_std: f64,
    ) -> Result<Self, DiffusionError> {
        let mels: Vec<&Matrix> = mels.into_iter().collect();
        let n_mels = mels.first().map(|m| m.cols()).unwrap_or(0);
        if n_mels == 0 || mels.iter().any(|m| m.cols() != n_mels) {
            return Err(DiffusionError::ShapeMismatch(
                "normalisation needs matrices with a common, non-zero band count".into(),
            ));
        }
        let frames: usize = mels.iter().map(|m| m.rows()).sum();
        if frames == 0 {
            return Err(DiffusionError::EmptyBatch);
        }
        let mut mean = vec![0.0; n_mels];
        for m in &mels {
            for row in m.iter_rows() {
                for (acc, v) in mean.iter_mut().zip(row) {
                    *acc += v;
                }
            }
        }
        mean.iter_mut().for_each(|v| *v /= frames as f64);
        let mut sq = 0.0;
        for m in &mels {
            for row in m.iter_rows() {
                sq += row.iter().zip(&mean).map(|(v, mu)| (v - mu).powi(2)).sum::<f64>();
            }
        }
        let std = (sq / (frames * n_mels) as f64).sqrt();
        let scale = (std / target_std).max(MIN_NORM_SCALE);
        Ok(Self { mean, scale })
    }

    pub fn normalize(&self, values: &Matrix) -> Matrix {
        Matrix::from_fn(values.rows(), values.cols(), |r, c| {
            (values[(r, c)] - self.mean[c]) / self.scale
        })
    }

    pub fn denormalize(&self, values: &Matrix) -> Matrix {
        Matrix::from_fn(values.rows(), values.cols(), |r, c| {
            values[(r, c)] * self.scale + self.mean[c]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_round_trip() {
        let a = Matrix::from_fn(6, 3, |r, c| (r as f64) * 0.5 - c as f64 * 2.0);
        let norm = MelNorm::fit([&a], 1.0).unwrap();
        let z = norm.normalize(&a);
        for c in 0..3 {
            let m: f64 = (0..6).map(|r| z[(r, c)]).sum::<f64>() / 6.0;
            assert!(m.abs() < 1e-12);
        }
        let back = norm.denormalize(&z);
        for (x, y) in back.as_slice().iter().zip(a.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
        let flat = Matrix::filled(4, 3, 2.0);
        assert_eq!(MelNorm::fit([&flat], 1.0).unwrap().scale, MIN_NORM_SCALE);
    }
}
