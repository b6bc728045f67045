use super::decoder::DecoderParams;
use super::schedule::NoiseSchedule;
use super::train::{example_loss, example_loss_and_gradient, NoiseDraw, TrainExample};
use super::DiffusionError;

/// Gradients smaller than this in both estimates are compared absolutely.
const REL_ERR_FLOOR: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_index: usize,
    pub n_params: usize,
}

/// Compares `analytic` against central differences of `f` around `x`.
/// Relative error per entry is `|a - n| / max(|a|, |n|, 1e-7)`.
pub fn check_gradients(
    x: &[f64],
    analytic: &[f64],
    mut f: impl FnMut(&[f64]) -> f64,
    h: f64,
) -> GradCheckReport {
    assert_eq!(x.len(), analytic.len());
    let mut probe = x.to_vec();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_index: 0,
        n_params: x.len(),
    };
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        let numeric = (up - down) / (2.0 * h);
        let a = analytic[i];
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(REL_ERR_FLOOR);
        if err > report.max_rel_error || err.is_nan() {
            report.max_rel_error = err;
            report.worst_index = i;
        }
    }
    report
}

/// Checks the decoder-plus-conditioning gradient of the noise loss for one
/// example and fixed noise draw against central finite differences.
pub fn gradient_check(
    params: &DecoderParams,
    example: &TrainExample,
    draw: &NoiseDraw,
    sched: &NoiseSchedule,
    h: f64,
) -> Result<GradCheckReport, DiffusionError> {
    let (_, grads) = example_loss_and_gradient(example, params, sched, draw)?;
    let mut scratch = params.clone();
    Ok(check_gradients(&params.to_flat(), &grads.to_flat(), |flat| {
        scratch.set_flat(flat);
        example_loss(example, &scratch, sched, draw).unwrap_or(f64::NAN)
    }, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Linear;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn affine_loss(layer: &Linear, x: &[f64], y: &[f64]) -> f64 {
        layer
            .forward(x)
            .iter()
            .zip(y)
            .map(|(p, t)| (p - t).powi(2))
            .sum()
    }

    fn flat(layer: &Linear) -> Vec<f64> {
        layer.weight.iter().chain(&layer.bias).copied().collect()
    }

    fn unflat(layer: &mut Linear, v: &[f64]) {
        let n = layer.weight.len();
        layer.weight.copy_from_slice(&v[..n]);
        layer.bias.copy_from_slice(&v[n..]);
    }

    #[test]
    fn affine_quadratic_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let layer = Linear::random(3, 2, &mut rng);
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
        // dL/dW = 2 (Wx + b - y) x^T, dL/db = 2 (Wx + b - y)
        let resid: Vec<f64> = layer.forward(&x).iter().zip(&y).map(|(p, t)| p - t).collect();
        let mut analytic = Vec::new();
        for r in &resid {
            analytic.extend(x.iter().map(|xi| 2.0 * r * xi));
        }
        analytic.extend(resid.iter().map(|r| 2.0 * r));
        let mut scratch = layer.clone();
        let report = check_gradients(&flat(&layer), &analytic, |v| {
            unflat(&mut scratch, v);
            affine_loss(&scratch, &x, &y)
        }, 1e-4);
        assert!(report.max_rel_error < 1e-6, "{report:?}");
    }

    #[test]
    fn corrupted_gradient_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let layer = Linear::random(3, 2, &mut rng);
        let x = [0.3, -0.7, 0.2];
        let y = [0.1, 0.5];
        let mut grad = Linear::zeros(3, 2);
        let resid: Vec<f64> = layer.forward(&x).iter().zip(&y).map(|(p, t)| 2.0 * (p - t)).collect();
        layer.backward(&x, &resid, &mut grad);
        let mut analytic = flat(&grad);
        analytic[2] *= 3.0;
        analytic[2] += 0.5;
        let mut scratch = layer.clone();
        let report = check_gradients(&flat(&layer), &analytic, |v| {
            unflat(&mut scratch, v);
            affine_loss(&scratch, &x, &y)
        }, 1e-4);
        assert!(report.max_rel_error > 0.1);
        assert_eq!(report.worst_index, 2);
    }
}
