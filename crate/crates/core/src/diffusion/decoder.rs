//! Noise predictor: three zero-padded time convolutions over the noisy mel
//! stacked with the condition tensor.

use rand::Rng;

use super::DiffusionError;
use crate::conditioning::{condition_backward, condition_forward, CondParams, ConditionTensor, ModelDims};
use crate::encoders::SpeakerEmbedding;
use crate::matrix::Matrix;
use crate::nn::{relu, relu_backward, Conv1d};
use crate::prosody::ProsodyTrack;

#[derive(Clone, Debug, PartialEq)]
pub struct DecoderParams {
    pub dims: ModelDims,
    pub cond: CondParams,
    pub conv1: Conv1d,
    pub conv2: Conv1d,
    pub conv3: Conv1d,
}

impl DecoderParams {
    pub fn zeros(dims: ModelDims) -> Self {
        Self {
            dims,
            cond: CondParams::zeros(dims),
            conv1: Conv1d::zeros(2 * dims.n_mels, dims.decoder_hidden, dims.kernel),
            conv2: Conv1d::zeros(dims.decoder_hidden, dims.decoder_hidden, dims.kernel),
            conv3: Conv1d::zeros(dims.decoder_hidden, dims.n_mels, dims.kernel),
        }
    }

    pub fn random(dims: ModelDims, rng: &mut impl Rng) -> Self {
        let cond = CondParams::random(dims, rng);
        Self {
            dims,
            cond,
            conv1: Conv1d::random(2 * dims.n_mels, dims.decoder_hidden, dims.kernel, rng),
            conv2: Conv1d::random(dims.decoder_hidden, dims.decoder_hidden, dims.kernel, rng),
            conv3: Conv1d::random(dims.decoder_hidden, dims.n_mels, dims.kernel, rng),
        }
    }

    /// Named parameter blocks in a fixed order with their logical dims.
    pub fn blocks(&self) -> Vec<(&'static str, Vec<usize>, &[f64])> {
        let conv = |c: &Conv1d| vec![c.out_ch, c.width, c.in_ch];
        let lin = &self.cond.style_proj;
        vec![
            ("cond.style_proj.weight", vec![lin.out_dim, lin.in_dim], &lin.weight[..]),
            ("cond.style_proj.bias", vec![lin.out_dim], &lin.bias[..]),
            ("cond.merge1.weight", conv(&self.cond.merge1), &self.cond.merge1.weight[..]),
            ("cond.merge1.bias", vec![self.cond.merge1.out_ch], &self.cond.merge1.bias[..]),
            ("cond.merge2.weight", conv(&self.cond.merge2), &self.cond.merge2.weight[..]),
            ("cond.merge2.bias", vec![self.cond.merge2.out_ch], &self.cond.merge2.bias[..]),
            ("dec.conv1.weight", conv(&self.conv1), &self.conv1.weight[..]),
            ("dec.conv1.bias", vec![self.conv1.out_ch], &self.conv1.bias[..]),
            ("dec.conv2.weight", conv(&self.conv2), &self.conv2.weight[..]),
            ("dec.conv2.bias", vec![self.conv2.out_ch], &self.conv2.bias[..]),
            ("dec.conv3.weight", conv(&self.conv3), &self.conv3.weight[..]),
            ("dec.conv3.bias", vec![self.conv3.out_ch], &self.conv3.bias[..]),
        ]
    }

    /// Mutable views in the same order as [`DecoderParams::blocks`].
    pub fn blocks_mut(&mut self) -> Vec<(&'static str, &mut Vec<f64>)> {
        vec![
            ("cond.style_proj.weight", &mut self.cond.style_proj.weight),
            ("cond.style_proj.bias", &mut self.cond.style_proj.bias),
            ("cond.merge1.weight", &mut self.cond.merge1.weight),
            ("cond.merge1.bias", &mut self.cond.merge1.bias),
            ("cond.merge2.weight", &mut self.cond.merge2.weight),
            ("cond.merge2.bias", &mut self.cond.merge2.bias),
            ("dec.conv1.weight", &mut self.conv1.weight),
            ("dec.conv1.bias", &mut self.conv1.bias),
            ("dec.conv2.weight", &mut self.conv2.weight),
            ("dec.conv2.bias", &mut self.conv2.bias),
            ("dec.conv3.weight", &mut self.conv3.weight),
            ("dec.conv3.bias", &mut self.conv3.bias),
        ]
    }

    pub fn n_params(&self) -> usize {
        self.blocks().iter().map(|b| b.2.len()).sum()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.blocks().iter().flat_map(|b| b.2.iter().copied()).collect()
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params());
        let mut offset = 0;
        for (_, block) in self.blocks_mut() {
            let n = block.len();
            block.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.2.iter().all(|v| v.is_finite()))
    }
}

fn check_shapes(x_t: &Matrix, condition: &Matrix, dims: &ModelDims) -> Result<(), DiffusionError> {
    if x_t.cols() != dims.n_mels || condition.shape() != x_t.shape() {
        return Err(DiffusionError::ShapeMismatch(format!(
            "x_t {:?}, condition {:?}, n_mels {}",
            x_t.shape(),
            condition.shape(),
            dims.n_mels
        )));
    }
    Ok(())
}

/// Estimated noise with the same shape as `x_t`.
pub fn predict_noise(
    x_t: &Matrix,
    condition: &ConditionTensor,
    params: &DecoderParams,
) -> Result<Matrix, DiffusionError> {
    check_shapes(x_t, condition.values(), &params.dims)?;
    let input = x_t.hconcat(condition.values());
    let h1 = relu(&params.conv1.forward(&input));
    let h2 = relu(&params.conv2.forward(&h1));
    Ok(params.conv3.forward(&h2))
}

/// Mean squared error between predicted and true noise.
pub fn noise_loss(eps_hat: &Matrix, eps: &Matrix) -> Result<f64, DiffusionError> {
    if eps_hat.shape() != eps.shape() {
        return Err(DiffusionError::ShapeMismatch(format!(
            "eps_hat {:?} vs eps {:?}",
            eps_hat.shape(),
            eps.shape()
        )));
    }
    let n = eps.as_slice().len();
    if n == 0 {
        return Ok(0.0);
    }
    let sum: f64 = eps_hat
        .as_slice()
        .iter()
        .zip(eps.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / n as f64)
}

/// Noise-prediction loss for a fixed `(t, eps)` draw and its gradient with
/// respect to every decoder and conditioning parameter.
pub(crate) fn loss_and_gradient(
    params: &DecoderParams,
    x_t: &Matrix,
    eps: &Matrix,
    track: &ProsodyTrack,
    speaker: &SpeakerEmbedding,
    t: f64,
) -> Result<(f64, DecoderParams), DiffusionError> {
    let (cond, tape) = condition_forward(track, speaker.values(), t, &params.cond)?;
    check_shapes(x_t, cond.values(), &params.dims)?;
    let input = x_t.hconcat(cond.values());
    let h1_pre = params.conv1.forward(&input);
    let h1 = relu(&h1_pre);
    let h2_pre = params.conv2.forward(&h1);
    let h2 = relu(&h2_pre);
    let out = params.conv3.forward(&h2);
    let loss = noise_loss(&out, eps)?;

    let scale = 2.0 / out.as_slice().len() as f64;
    let g_out = out.axpby(scale, eps, -scale);
    let mut grads = DecoderParams::zeros(params.dims);
    let g_h2 = params.conv3.backward(&h2, &g_out, &mut grads.conv3);
    let g_h2_pre = relu_backward(&h2_pre, &g_h2);
    let g_h1 = params.conv2.backward(&h1, &g_h2_pre, &mut grads.conv2);
    let g_h1_pre = relu_backward(&h1_pre, &g_h1);
    let g_input = params.conv1.backward(&input, &g_h1_pre, &mut grads.conv1);
    let (_, g_cond) = g_input.hsplit(params.dims.n_mels);
    condition_backward(&tape, &g_cond, &params.cond, &mut grads.cond);
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_params_zero_output() {
        let dims = ModelDims::default();
        let params = DecoderParams::zeros(dims);
        for t in [1usize, 50] {
            let x = Matrix::filled(t, 80, 0.3);
            let cond = ConditionTensor(Matrix::filled(t, 80, -0.2));
            let out = predict_noise(&x, &cond, &params).unwrap();
            assert_eq!(out.shape(), (t, 80));
            assert!(out.as_slice().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn condition_changes_output() {
        let dims = ModelDims::default();
        let params = DecoderParams::random(dims, &mut ChaCha8Rng::seed_from_u64(9));
        let x = Matrix::from_fn(12, 80, |r, c| ((r * 80 + c) as f64 * 0.01).sin());
        let a = predict_noise(&x, &ConditionTensor(Matrix::zeros(12, 80)), &params).unwrap();
        let b = predict_noise(&x, &ConditionTensor(Matrix::filled(12, 80, 0.5)), &params).unwrap();
        let diff: f64 = a
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(p, q)| (p - q).powi(2))
            .sum();
        assert!(diff > 0.0);
    }

    #[test]
    fn shape_mismatch() {
        let params = DecoderParams::zeros(ModelDims::default());
        let x = Matrix::zeros(5, 80);
        let cond = ConditionTensor(Matrix::zeros(4, 80));
        assert!(matches!(
            predict_noise(&x, &cond, &params),
            Err(DiffusionError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn loss_cases() {
        let eps = Matrix::from_fn(5, 4, |r, c| (r as f64 - c as f64) * 0.7);
        assert_eq!(noise_loss(&eps, &eps).unwrap(), 0.0);
        let shifted = eps.map(|v| v + 0.3);
        assert!((noise_loss(&shifted, &eps).unwrap() - 0.09).abs() < 1e-12);
        assert!(noise_loss(&eps, &Matrix::zeros(4, 5)).is_err());
    }

    #[test]
    fn flat_round_trip() {
        let mut p = DecoderParams::random(ModelDims::tiny(), &mut ChaCha8Rng::seed_from_u64(1));
        let flat = p.to_flat();
        assert_eq!(flat.len(), p.n_params());
        let mut q = DecoderParams::zeros(ModelDims::tiny());
        q.set_flat(&flat);
        assert_eq!(p, q);
        p.set_flat(&vec![0.0; flat.len()]);
        assert_eq!(p, DecoderParams::zeros(ModelDims::tiny()));
    }
}
