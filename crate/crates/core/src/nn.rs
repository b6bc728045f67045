//! Minimal layers with hand-written reverse-mode gradients: a dense layer
//! and a zero-padded 1-D convolution over time.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::matrix::Matrix;

/// `y = W x + b` with `W` stored row-major as `[out][in]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Linear {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weight: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    pub fn random(in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        let mut layer = Self::zeros(in_dim, out_dim);
        fill_normal(&mut layer.weight, (1.0 / in_dim as f64).sqrt(), rng);
        layer
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.in_dim);
        (0..self.out_dim)
            .map(|o| {
                let row = &self.weight[o * self.in_dim..(o + 1) * self.in_dim];
                self.bias[o] + dot(row, x)
            })
            .collect()
    }

    /// Accumulates parameter gradients into `grad` and returns dL/dx.
    pub fn backward(&self, x: &[f64], grad_out: &[f64], grad: &mut Linear) -> Vec<f64> {
        let mut grad_in = vec![0.0; self.in_dim];
        for o in 0..self.out_dim {
            let g = grad_out[o];
            grad.bias[o] += g;
            let row = &self.weight[o * self.in_dim..(o + 1) * self.in_dim];
            let grow = &mut grad.weight[o * self.in_dim..(o + 1) * self.in_dim];
            for i in 0..self.in_dim {
                grow[i] += g * x[i];
                grad_in[i] += g * row[i];
            }
        }
        grad_in
    }

    pub fn n_params(&self) -> usize {
        self.weight.len() + self.bias.len()
    }
}

/// Same-length 1-D convolution over the time (row) axis with zero padding.
/// Weights are stored as `[out][tap][in]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv1d {
    pub in_ch: usize,
    pub out_ch: usize,
    pub width: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv1d {
    pub fn zeros(in_ch: usize, out_ch: usize, width: usize) -> Self {
        assert!(width % 2 == 1, "odd kernel width");
        Self {
            in_ch,
            out_ch,
            width,
            weight: vec![0.0; out_ch * width * in_ch],
            bias: vec![0.0; out_ch],
        }
    }

    pub fn random(in_ch: usize, out_ch: usize, width: usize, rng: &mut impl Rng) -> Self {
        let mut layer = Self::zeros(in_ch, out_ch, width);
        fill_normal(&mut layer.weight, (1.0 / (in_ch * width) as f64).sqrt(), rng);
        layer
    }

    fn taps(&self, o: usize, k: usize) -> &[f64] {
        let start = (o * self.width + k) * self.in_ch;
        &self.weight[start..start + self.in_ch]
    }

    pub fn forward(&self, x: &Matrix) -> Matrix {
        debug_assert_eq!(x.cols(), self.in_ch);
        let t_len = x.rows();
        let half = self.width / 2;
        let mut out = Matrix::zeros(t_len, self.out_ch);
        for t in 0..t_len {
            let row = out.row_mut(t);
            row.copy_from_slice(&self.bias);
            for k in 0..self.width {
                let Some(src) = (t + k).checked_sub(half).filter(|&s| s < t_len) else {
                    continue;
                };
                let input = x.row(src);
                for (o, y) in row.iter_mut().enumerate() {
                    *y += dot(self.taps(o, k), input);
                }
            }
        }
        out
    }

    /// Accumulates parameter gradients into `grad` and returns dL/dx.
    pub fn backward(&self, x: &Matrix, grad_out: &Matrix, grad: &mut Conv1d) -> Matrix {
        let t_len = x.rows();
        let half = self.width / 2;
        let mut grad_in = Matrix::zeros(t_len, self.in_ch);
        for t in 0..t_len {
            let g_row = grad_out.row(t);
            for (o, &g) in g_row.iter().enumerate() {
                grad.bias[o] += g;
            }
            for k in 0..self.width {
                let Some(src) = (t + k).checked_sub(half).filter(|&s| s < t_len) else {
                    continue;
                };
                let input = x.row(src);
                for (o, &g) in g_row.iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    let start = (o * self.width + k) * self.in_ch;
                    let gw = &mut grad.weight[start..start + self.in_ch];
                    for (gw_i, &x_i) in gw.iter_mut().zip(input) {
                        *gw_i += g * x_i;
                    }
                    let w = &self.weight[start..start + self.in_ch];
                    for (gi, &w_i) in grad_in.row_mut(src).iter_mut().zip(w) {
                        *gi += g * w_i;
                    }
                }
            }
        }
        grad_in
    }

    pub fn n_params(&self) -> usize {
        self.weight.len() + self.bias.len()
    }
}

pub fn relu(x: &Matrix) -> Matrix {
    x.map(|v| v.max(0.0))
}

/// Gradient through ReLU given the pre-activation.
pub fn relu_backward(pre: &Matrix, grad_out: &Matrix) -> Matrix {
    Matrix::from_fn(pre.rows(), pre.cols(), |r, c| {
        if pre[(r, c)] > 0.0 {
            grad_out[(r, c)]
        } else {
            0.0
        }
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn fill_normal(buf: &mut [f64], std: f64, rng: &mut impl Rng) {
    let normal = Normal::new(0.0, std).expect("finite std");
    for v in buf {
        *v = normal.sample(rng);
    }
}
