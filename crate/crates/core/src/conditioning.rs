//! Prosody conditioning: fuse the speaker embedding and diffusion step into
//! a style vector, broadcast it over time next to log-F0 and log energy, and
//! merge everything with two time convolutions into a `T x n_mels`
//! condition that is stacked onto the noisy mel along the frequency axis.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoders::SpeakerEmbedding;
use crate::matrix::Matrix;
use crate::nn::{relu, relu_backward, Conv1d, Linear};
use crate::prosody::ProsodyTrack;

#[derive(Debug, Error)]
pub enum CondError {
    #[error("BadDim: step embedding size must be even and positive, got {0}")]
    BadDim(usize),
    #[error("BadStep: diffusion time {0} is outside [0, 1]")]
    BadStep(f64),
    #[error("DimMismatch: {what}: expected {expected}, got {got}")]
    DimMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("EmptyTrack: prosody track has no frames")]
    EmptyTrack,
}

/// Layer sizes shared by the conditioning module and the decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub n_mels: usize,
    pub speaker_dim: usize,
    pub t_embed_dim: usize,
    pub style_dim: usize,
    pub merge_hidden: usize,
    pub decoder_hidden: usize,
    pub kernel: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        Self {
            n_mels: 80,
            speaker_dim: 64,
            t_embed_dim: 64,
            style_dim: 64,
            merge_hidden: 64,
            decoder_hidden: 64,
            kernel: 3,
        }
    }
}

impl ModelDims {
    /// A few-hundred-parameter configuration for gradient checks.
    pub fn tiny() -> Self {
        Self {
            n_mels: 4,
            speaker_dim: 4,
            t_embed_dim: 4,
            style_dim: 4,
            merge_hidden: 4,
            decoder_hidden: 4,
            kernel: 3,
        }
    }
}

/// Sinusoidal embedding of the diffusion time: interleaved
/// `(sin(t w_k), cos(t w_k))` with `w_k` geometric from 1 to 1e4.
pub fn step_embedding(t: f64, dim: usize) -> Result<Vec<f64>, CondError> {
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(CondError::BadDim(dim));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(CondError::BadStep(t));
    }
    let half = dim / 2;
    let mut out = Vec::with_capacity(dim);
    for k in 0..half {
        let freq = if half == 1 {
            1.0
        } else {
            10f64.powf(4.0 * k as f64 / (half - 1) as f64)
        };
        let (s, c) = (t * freq).sin_cos();
        out.push(s);
        out.push(c);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StyleVector(pub Vec<f64>);

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionTensor(pub Matrix);

impl ConditionTensor {
    pub fn values(&self) -> &Matrix {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CondParams {
    pub dims: ModelDims,
    pub style_proj: Linear,
    pub merge1: Conv1d,
    pub merge2: Conv1d,
}

impl CondParams {
    pub fn zeros(dims: ModelDims) -> Self {
        Self {
            dims,
            style_proj: Linear::zeros(dims.speaker_dim + dims.t_embed_dim, dims.style_dim),
            merge1: Conv1d::zeros(2 + dims.style_dim, dims.merge_hidden, dims.kernel),
            merge2: Conv1d::zeros(dims.merge_hidden, dims.n_mels, dims.kernel),
        }
    }

    pub fn random(dims: ModelDims, rng: &mut impl Rng) -> Self {
        Self {
            dims,
            style_proj: Linear::random(dims.speaker_dim + dims.t_embed_dim, dims.style_dim, rng),
            merge1: Conv1d::random(2 + dims.style_dim, dims.merge_hidden, dims.kernel, rng),
            merge2: Conv1d::random(dims.merge_hidden, dims.n_mels, dims.kernel, rng),
        }
    }

    pub fn n_params(&self) -> usize {
        self.style_proj.n_params() + self.merge1.n_params() + self.merge2.n_params()
    }
}

/// `tanh(W [speaker; step_embedding(t)] + b)`.
pub fn build_style(
    speaker: &SpeakerEmbedding,
    t: f64,
    params: &CondParams,
) -> Result<StyleVector, CondError> {
    Ok(StyleVector(style_forward(speaker.values(), t, params)?.1))
}

fn style_forward(
    speaker: &[f64],
    t: f64,
    params: &CondParams,
) -> Result<(Vec<f64>, Vec<f64>), CondError> {
    let dims = params.dims;
    if speaker.len() != dims.speaker_dim {
        return Err(CondError::DimMismatch {
            what: "speaker embedding",
            expected: dims.speaker_dim,
            got: speaker.len(),
        });
    }
    let mut input = speaker.to_vec();
    input.extend(step_embedding(t, dims.t_embed_dim)?);
    let style = params
        .style_proj
        .forward(&input)
        .into_iter()
        .map(f64::tanh)
        .collect();
    Ok((input, style))
}

fn merge_input(track: &ProsodyTrack, style: &[f64]) -> Matrix {
    let channels = 2 + style.len();
    Matrix::from_fn(track.n_frames(), channels, |t, c| match c {
        0 => track.log_f0()[t],
        1 => track.log_energy()[t],
        _ => style[c - 2],
    })
}

/// Time-varying condition: `[log_f0, log_energy, style...]` per frame
/// through conv, ReLU, conv. Output is `T x n_mels`.
pub fn build_condition(
    track: &ProsodyTrack,
    style: &StyleVector,
    params: &CondParams,
) -> Result<ConditionTensor, CondError> {
    if track.n_frames() == 0 {
        return Err(CondError::EmptyTrack);
    }
    if style.0.len() != params.dims.style_dim {
        return Err(CondError::DimMismatch {
            what: "style vector",
            expected: params.dims.style_dim,
            got: style.0.len(),
        });
    }
    let x = merge_input(track, &style.0);
    let h = relu(&params.merge1.forward(&x));
    Ok(ConditionTensor(params.merge2.forward(&h)))
}

/// Intermediate values kept for the backward pass.
pub(crate) struct CondTape {
    style_input: Vec<f64>,
    style: Vec<f64>,
    merge_in: Matrix,
    hidden_pre: Matrix,
    hidden: Matrix,
}

pub(crate) fn condition_forward(
    track: &ProsodyTrack,
    speaker: &[f64],
    t: f64,
    params: &CondParams,
) -> Result<(ConditionTensor, CondTape), CondError> {
    if track.n_frames() == 0 {
        return Err(CondError::EmptyTrack);
    }
    let (style_input, style) = style_forward(speaker, t, params)?;
    let merge_in = merge_input(track, &style);
    let hidden_pre = params.merge1.forward(&merge_in);
    let hidden = relu(&hidden_pre);
    let out = params.merge2.forward(&hidden);
    Ok((
        ConditionTensor(out),
        CondTape {
            style_input,
            style,
            merge_in,
            hidden_pre,
            hidden,
        },
    ))
}

pub(crate) fn condition_backward(
    tape: &CondTape,
    grad_out: &Matrix,
    params: &CondParams,
    grads: &mut CondParams,
) {
    let g_hidden = params
        .merge2
        .backward(&tape.hidden, grad_out, &mut grads.merge2);
    let g_hidden_pre = relu_backward(&tape.hidden_pre, &g_hidden);
    let g_merge_in = params
        .merge1
        .backward(&tape.merge_in, &g_hidden_pre, &mut grads.merge1);
    // Style is broadcast over time: its gradient sums over frames. The
    // prosody channels are inputs, not parameters.
    let style_dim = tape.style.len();
    let mut g_style = vec![0.0; style_dim];
    for row in g_merge_in.iter_rows() {
        for (g, &v) in g_style.iter_mut().zip(&row[2..]) {
            *g += v;
        }
    }
    let g_style_pre: Vec<f64> = g_style
        .iter()
        .zip(&tape.style)
        .map(|(g, s)| g * (1.0 - s * s))
        .collect();
    params
        .style_proj
        .backward(&tape.style_input, &g_style_pre, &mut grads.style_proj);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn speaker(dim: usize, seed: u64) -> SpeakerEmbedding {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SpeakerEmbedding::from_raw((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .unwrap()
    }

    fn constant_track(n: usize, f0: f64, energy: f64) -> ProsodyTrack {
        ProsodyTrack::from_f0_hz(&vec![f0; n], vec![energy; n]).unwrap()
    }

    #[test]
    fn step_embedding_boundary() {
        let e = step_embedding(0.0, 8).unwrap();
        for pair in e.chunks(2) {
            assert_eq!(pair, &[0.0, 1.0]);
        }
        let e1 = step_embedding(1.0, 8).unwrap();
        let dist: f64 = e.iter().zip(&e1).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(dist > 0.1);
        assert!(matches!(step_embedding(0.5, 3), Err(CondError::BadDim(3))));
        assert!(matches!(step_embedding(1.5, 4), Err(CondError::BadStep(_))));
    }

    #[test]
    fn zero_params_give_zero_outputs() {
        let dims = ModelDims::default();
        let params = CondParams::zeros(dims);
        let style = build_style(&speaker(dims.speaker_dim, 1), 0.3, &params).unwrap();
        assert!(style.0.iter().all(|&v| v == 0.0));
        assert_eq!(style.0.len(), 64);
        let cond = build_condition(&constant_track(7, 120.0, -3.0), &style, &params).unwrap();
        assert!(cond.values().as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn deterministic_style() {
        let dims = ModelDims::default();
        let params = CondParams::random(dims, &mut ChaCha8Rng::seed_from_u64(5));
        let spk = speaker(dims.speaker_dim, 2);
        assert_eq!(
            build_style(&spk, 0.4, &params).unwrap(),
            build_style(&spk, 0.4, &params).unwrap()
        );
        let wrong = speaker(10, 2);
        assert!(matches!(
            build_style(&wrong, 0.4, &params),
            Err(CondError::DimMismatch { .. })
        ));
    }

    #[test]
    fn length_preserved() {
        let dims = ModelDims::default();
        let params = CondParams::random(dims, &mut ChaCha8Rng::seed_from_u64(6));
        let style = build_style(&speaker(dims.speaker_dim, 3), 0.5, &params).unwrap();
        for t in [1usize, 7, 100] {
            let cond = build_condition(&constant_track(t, 200.0, 1.0), &style, &params).unwrap();
            assert_eq!(cond.values().shape(), (t, dims.n_mels));
        }
    }

    #[test]
    fn depends_on_step() {
        let dims = ModelDims::default();
        let params = CondParams::random(dims, &mut ChaCha8Rng::seed_from_u64(7));
        let spk = speaker(dims.speaker_dim, 4);
        let track = constant_track(10, 150.0, 0.5);
        let a = build_condition(&track, &build_style(&spk, 0.1, &params).unwrap(), &params).unwrap();
        let b = build_condition(&track, &build_style(&spk, 0.9, &params).unwrap(), &params).unwrap();
        assert_ne!(a, b);
    }
}
