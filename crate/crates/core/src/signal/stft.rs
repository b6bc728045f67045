//! Framing and short-time Fourier transforms.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::FrameGeometry;
use crate::matrix::Matrix;

/// Number of centred frames for `n_samples` at the given hop.
pub fn frame_count(n_samples: usize, hop: usize) -> usize {
    n_samples / hop + 1
}

/// Periodic Hann window.
pub fn hann_window(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
        .collect()
}

/// Pads both ends by mirror reflection (edge sample not repeated). Inputs
/// shorter than `pad` are reflected repeatedly.
pub fn reflect_pad(x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return vec![0.0; 2 * pad];
    }
    if n == 1 {
        return vec![x[0]; n + 2 * pad];
    }
    let period = 2 * (n - 1) as isize;
    let reflect = |i: isize| -> f64 {
        let mut j = i.rem_euclid(period);
        if j >= n as isize {
            j = period - j;
        }
        x[j as usize]
    };
    (-(pad as isize)..(n + pad) as isize).map(reflect).collect()
}

/// Iterates over `n_frames` frames of `frame_len` samples from a padded
/// signal, zero-extending past its end.
pub fn frames(padded: &[f64], frame_len: usize, hop: usize, n_frames: usize) -> Vec<Vec<f64>> {
    (0..n_frames)
        .map(|i| {
            let start = i * hop;
            (start..start + frame_len)
                .map(|j| padded.get(j).copied().unwrap_or(0.0))
                .collect()
        })
        .collect()
}

/// Short-time Fourier transform with a Hann window of `window` samples
/// centred inside an `fft_size` frame.
#[derive(Clone)]
pub struct Stft {
    geometry: FrameGeometry,
    window: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Stft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stft").field("geometry", &self.geometry).finish()
    }
}

impl Stft {
    pub fn new(geometry: FrameGeometry) -> Self {
        let mut planner = FftPlanner::new();
        let n = geometry.fft_size;
        let mut window = vec![0.0; n];
        let offset = (n - geometry.window) / 2;
        window[offset..offset + geometry.window].copy_from_slice(&hann_window(geometry.window));
        Self {
            geometry,
            window,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn geometry(&self) -> FrameGeometry {
        self.geometry
    }

    pub fn n_bins(&self) -> usize {
        self.geometry.fft_size / 2 + 1
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// Spectrum of one already-padded frame (`fft_size` samples).
    pub fn frame_spectrum(&self, frame: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = frame
            .iter()
            .zip(&self.window)
            .map(|(&x, &w)| Complex::new(x * w, 0.0))
            .collect();
        self.forward.process(&mut buf);
        buf.truncate(self.n_bins());
        buf
    }

    /// Complex STFT of a signal that has already been padded; returns one
    /// spectrum per frame.
    pub fn analyze_padded(&self, padded: &[f64], n_frames: usize) -> Vec<Vec<Complex<f64>>> {
        frames(padded, self.geometry.fft_size, self.geometry.hop, n_frames)
            .iter()
            .map(|f| self.frame_spectrum(f))
            .collect()
    }

    /// Power spectrogram (|X|^2) with reflection centre padding.
    pub fn power(&self, samples: &[f64]) -> Matrix {
        let padded = reflect_pad(samples, self.geometry.pad());
        let n_frames = self.geometry.n_frames(samples.len());
        let spectra = self.analyze_padded(&padded, n_frames);
        let bins = self.n_bins();
        Matrix::from_fn(n_frames, bins, |t, k| spectra[t][k].norm_sqr())
    }

    /// Inverse of the zero-centre-padded STFT in the least-squares sense:
    /// windowed overlap-add normalised by the summed squared window. The
    /// result has `(T - 1) * hop` samples.
    pub fn inverse_zero_padded(&self, spectra: &[Vec<Complex<f64>>]) -> Vec<f64> {
        let n_frames = spectra.len();
        if n_frames == 0 {
            return Vec::new();
        }
        let n = self.geometry.fft_size;
        let hop = self.geometry.hop;
        let pad = self.geometry.pad();
        let out_len = (n_frames - 1) * hop;
        let padded_len = out_len + n;
        let mut acc = vec![0.0; padded_len];
        let mut norm = vec![0.0; padded_len];
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        for (t, spec) in spectra.iter().enumerate() {
            buf[..spec.len()].copy_from_slice(spec);
            // Hermitian extension of the half spectrum.
            for k in 1..n - spec.len() + 1 {
                buf[n - k] = spec[k].conj();
            }
            buf[0].im = 0.0;
            if n.is_multiple_of(2) {
                buf[n / 2].im = 0.0;
            }
            self.inverse.process(&mut buf);
            let start = t * hop;
            for (j, c) in buf.iter().enumerate() {
                let w = self.window[j];
                acc[start + j] += w * c.re / n as f64;
                norm[start + j] += w * w;
            }
        }
        (pad..pad + out_len)
            .map(|i| {
                if norm[i] > 1e-12 {
                    acc[i] / norm[i]
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Forward STFT matching [`Stft::inverse_zero_padded`]: zero centre
    /// padding, `n_frames` frames.
    pub fn analyze_zero_padded(&self, samples: &[f64], n_frames: usize) -> Vec<Vec<Complex<f64>>> {
        let pad = self.geometry.pad();
        let mut padded = vec![0.0; pad];
        padded.extend_from_slice(samples);
        padded.resize(samples.len() + 2 * pad, 0.0);
        self.analyze_padded(&padded, n_frames)
    }
}
