use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::decoder::{predict_noise, DecoderParams};
use super::schedule::NoiseSchedule;
use super::DiffusionError;
use crate::conditioning::{build_condition, build_style};
use crate::encoders::SpeakerEmbedding;
use crate::matrix::Matrix;
use crate::prosody::ProsodyTrack;

fn normal_like(shape: (usize, usize), rng: &mut dyn RngCore) -> Matrix {
    Matrix::from_fn(shape.0, shape.1, |_, _| StandardNormal.sample(&mut *rng))
}

/// Walks the grid from `t = 1` down to `t = 0`. Each step estimates the
/// clean mel from the predicted noise and re-noises it to the next level,
/// with fresh noise when `rng` is given and with the predicted noise
/// otherwise (a deterministic sampler that starts exactly at the prior).
pub fn reverse_sample<D>(
    prior: &Matrix,
    denoise: D,
    sched: &NoiseSchedule,
    mut rng: Option<&mut dyn RngCore>,
) -> Result<Matrix, DiffusionError>
where
    D: Fn(&Matrix, f64) -> Result<Matrix, DiffusionError>,
{
    if sched.n_steps == 0 {
        return Err(DiffusionError::BadSchedule("n_steps must be at least 1".into()));
    }
    let shape = prior.shape();
    let mut x = match rng.as_deref_mut() {
        Some(r) => prior.axpby(1.0, &normal_like(shape, r), 1.0),
        None => prior.clone(),
    };
    for i in (1..=sched.n_steps).rev() {
        let t = sched.grid_time(i);
        let (a, s) = (sched.alpha(t), sched.sigma(t));
        let eps_hat = denoise(&x, t)?;
        if eps_hat.shape() != shape {
            return Err(DiffusionError::ShapeMismatch(format!(
                "denoiser returned {:?} for {:?}",
                eps_hat.shape(),
                shape
            )));
        }
        let x0_hat = Matrix::from_fn(shape.0, shape.1, |r, c| {
            (x[(r, c)] - (1.0 - a) * prior[(r, c)] - s * eps_hat[(r, c)]) / a
        });
        let t_next = sched.grid_time(i - 1);
        let (a_next, s_next) = (sched.alpha(t_next), sched.sigma(t_next));
        let noise = match rng.as_deref_mut() {
            Some(r) => normal_like(shape, r),
            None => eps_hat,
        };
        x = Matrix::from_fn(shape.0, shape.1, |r, c| {
            a_next * x0_hat[(r, c)] + (1.0 - a_next) * prior[(r, c)] + s_next * noise[(r, c)]
        });
    }
    Ok(x)
}

/// Noise predictor closure driven by the trained decoder, rebuilding the
/// condition for each diffusion time.
pub fn decoder_denoiser<'a>(
    params: &'a DecoderParams,
    track: &'a ProsodyTrack,
    speaker: &'a SpeakerEmbedding,
) -> impl Fn(&Matrix, f64) -> Result<Matrix, DiffusionError> + 'a {
    move |x_t, t| {
        let style = build_style(speaker, t, &params.cond)?;
        let cond = build_condition(track, &style, &params.cond)?;
        predict_noise(x_t, &cond, params)
    }
}
