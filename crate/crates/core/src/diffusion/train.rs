use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::decoder::{loss_and_gradient, DecoderParams};
use super::schedule::{forward_diffuse, NoiseSchedule};
use super::DiffusionError;
use crate::encoders::SpeakerEmbedding;
use crate::matrix::Matrix;
use crate::prosody::ProsodyTrack;

/// One training utterance: clean mel and prior (both in the normalised
/// working space), its prosody, and a speaker embedding taken from another
/// utterance of the same speaker.
#[derive(Clone, Debug)]
pub struct TrainExample {
    pub x0: Matrix,
    pub prior: Matrix,
    pub prosody: ProsodyTrack,
    pub speaker: SpeakerEmbedding,
}

impl TrainExample {
    fn check(&self) -> Result<(), DiffusionError> {
        if self.x0.shape() != self.prior.shape() || self.x0.rows() != self.prosody.n_frames() {
            return Err(DiffusionError::ShapeMismatch(format!(
                "x0 {:?}, prior {:?}, prosody {} frames",
                self.x0.shape(),
                self.prior.shape(),
                self.prosody.n_frames()
            )));
        }
        Ok(())
    }
}

/// A diffusion time on the grid together with its noise sample.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseDraw {
    pub t: f64,
    pub eps: Matrix,
}

/// Grid time uniform over `1..=n_steps` (the clean level `t = 0` carries no
/// noise to predict) and standard-normal noise.
pub fn draw_noise(shape: (usize, usize), sched: &NoiseSchedule, rng: &mut impl Rng) -> NoiseDraw {
    let i = rng.random_range(1..=sched.n_steps);
    let eps = Matrix::from_fn(shape.0, shape.1, |_, _| StandardNormal.sample(rng));
    NoiseDraw {
        t: sched.grid_time(i),
        eps,
    }
}

pub(crate) fn example_loss_and_gradient(
    example: &TrainExample,
    params: &DecoderParams,
    sched: &NoiseSchedule,
    draw: &NoiseDraw,
) -> Result<(f64, DecoderParams), DiffusionError> {
    example.check()?;
    let x_t = forward_diffuse(&example.x0, &example.prior, draw.t, &draw.eps, sched)?;
    loss_and_gradient(params, &x_t, &draw.eps, &example.prosody, &example.speaker, draw.t)
}

/// Noise-prediction loss for a fixed draw.
pub fn example_loss(
    example: &TrainExample,
    params: &DecoderParams,
    sched: &NoiseSchedule,
    draw: &NoiseDraw,
) -> Result<f64, DiffusionError> {
    Ok(example_loss_and_gradient(example, params, sched, draw)?.0)
}

/// One plain gradient-descent update on the batch-mean loss with fresh
/// noise draws. Returns the updated parameters and the loss before the
/// update.
pub fn train_step(
    batch: &[TrainExample],
    params: &DecoderParams,
    sched: &NoiseSchedule,
    lr: f64,
    rng: &mut impl Rng,
) -> Result<(DecoderParams, f64), DiffusionError> {
    let draws: Vec<NoiseDraw> = batch
        .iter()
        .map(|ex| draw_noise(ex.x0.shape(), sched, rng))
        .collect();
    train_step_with(batch, &draws, params, sched, lr)
}

/// Gradient-descent update with caller-supplied draws, one per example.
pub fn train_step_with(
    batch: &[TrainExample],
    draws: &[NoiseDraw],
    params: &DecoderParams,
    sched: &NoiseSchedule,
    lr: f64,
) -> Result<(DecoderParams, f64), DiffusionError> {
    if batch.is_empty() {
        return Err(DiffusionError::EmptyBatch);
    }
    if draws.len() != batch.len() {
        return Err(DiffusionError::ShapeMismatch(format!(
            "{} draws for {} examples",
            draws.len(),
            batch.len()
        )));
    }
    let mut total = 0.0;
    let mut grad_sum = vec![0.0; params.n_params()];
    for (example, draw) in batch.iter().zip(draws) {
        let (loss, grads) = example_loss_and_gradient(example, params, sched, draw)?;
        total += loss;
        for (acc, g) in grad_sum.iter_mut().zip(grads.to_flat()) {
            *acc += g;
        }
    }
    let loss = total / batch.len() as f64;
    if !loss.is_finite() {
        return Err(DiffusionError::NonFiniteLoss(loss));
    }
    if lr == 0.0 {
        return Ok((params.clone(), loss));
    }
    let scale = lr / batch.len() as f64;
    let flat: Vec<f64> = params
        .to_flat()
        .iter()
        .zip(&grad_sum)
        .map(|(p, g)| p - scale * g)
        .collect();
    let mut next = params.clone();
    next.set_flat(&flat);
    if !next.is_finite() {
        return Err(DiffusionError::NonFiniteLoss(f64::NAN));
    }
    Ok((next, loss))
}
