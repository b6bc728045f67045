//! Lightweight vocoder: non-negative least-squares inversion of the mel
//! filterbank followed by Griffin-Lim phase reconstruction.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use thiserror::Error;

use crate::matrix::Matrix;
use crate::signal::{mel_filterbank, MelConfig, MelSpectrogram, Stft, Waveform};

pub const DEFAULT_GL_ITERS: usize = 60;
const NNLS_MAX_ITERS: usize = 300;
const NNLS_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum VocoderError {
    #[error("ConfigMismatch: {0}")]
    ConfigMismatch(String),
}

/// Non-zero span of each mel filter, for cheap products with the bank.
struct SparseBank {
    rows: Vec<(usize, Vec<f64>)>,
    n_bins: usize,
}

impl SparseBank {
    fn new(bank: &Matrix) -> Self {
        let rows = bank
            .iter_rows()
            .map(|row| {
                let start = row.iter().position(|&w| w > 0.0).unwrap_or(0);
                let end = row.iter().rposition(|&w| w > 0.0).map_or(start, |e| e + 1);
                (start, row[start..end].to_vec())
            })
            .collect();
        Self {
            rows,
            n_bins: bank.cols(),
        }
    }

    fn apply(&self, p: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|(s, w)| w.iter().zip(&p[*s..]).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn apply_t(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_bins];
        for ((s, w), &rv) in self.rows.iter().zip(r) {
            for (o, &wv) in out[*s..].iter_mut().zip(w) {
                *o += wv * rv;
            }
        }
        out
    }

    /// Largest eigenvalue of `B^T B` by power iteration.
    fn lipschitz(&self) -> f64 {
        let mut v = vec![1.0; self.n_bins];
        let mut lambda = 0.0;
        for _ in 0..100 {
            let w = self.apply_t(&self.apply(&v));
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let next = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v = w.iter().map(|x| x / norm).collect();
            if (next - lambda).abs() <= 1e-9 * next {
                return next;
            }
            lambda = next;
        }
        lambda
    }
}

/// Accelerated projected gradient for `min ||B p - e||^2, p >= 0`.
fn nnls(bank: &SparseBank, lipschitz: f64, target: &[f64]) -> Vec<f64> {
    let n = bank.n_bins;
    let mut p = vec![0.0; n];
    if lipschitz == 0.0 || target.iter().all(|&e| e == 0.0) {
        return p;
    }
    let step = 1.0 / lipschitz;
    let mut y = p.clone();
    let mut momentum = 1.0f64;
    let scale = target.iter().map(|e| e * e).sum::<f64>().sqrt();
    for _ in 0..NNLS_MAX_ITERS {
        let resid: Vec<f64> = bank.apply(&y).iter().zip(target).map(|(a, b)| a - b).collect();
        let grad = bank.apply_t(&resid);
        let next: Vec<f64> = y
            .iter()
            .zip(&grad)
            .map(|(yv, g)| (yv - step * g).max(0.0))
            .collect();
        let m_next = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
        let beta = (momentum - 1.0) / m_next;
        let delta: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        y = next.iter().zip(&p).map(|(a, b)| a + beta * (a - b)).collect();
        p = next;
        momentum = m_next;
        if delta <= NNLS_TOL * scale.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    p
}

/// Linear STFT magnitudes (`T x (fft_size/2 + 1)`) from a log-mel
/// spectrogram. Bands at the log floor are treated as carrying no energy.
pub fn mel_to_linear(mel: &MelSpectrogram) -> Result<Matrix, VocoderError> {
    let cfg = &mel.config;
    cfg.validate()
        .map_err(|e| VocoderError::ConfigMismatch(e.to_string()))?;
    if mel.values.cols() != cfg.n_mels {
        return Err(VocoderError::ConfigMismatch(format!(
            "{} bands but n_mels = {}",
            mel.values.cols(),
            cfg.n_mels
        )));
    }
    let bank = SparseBank::new(&mel_filterbank(cfg));
    let lipschitz = bank.lipschitz();
    let floor = cfg.log_floor_value();
    let mut out = Matrix::zeros(mel.n_frames(), cfg.n_bins());
    for (t, row) in mel.values.iter_rows().enumerate() {
        let energy: Vec<f64> = row
            .iter()
            .map(|&v| if v <= floor + 1e-9 { 0.0 } else { v.exp() })
            .collect();
        let power = nnls(&bank, lipschitz, &energy);
        for (o, p) in out.row_mut(t).iter_mut().zip(power) {
            *o = p.max(0.0).sqrt();
        }
    }
    Ok(out)
}

fn check_bins(mag: &Matrix, cfg: &MelConfig) -> Result<(), VocoderError> {
    if mag.cols() != cfg.n_bins() {
        return Err(VocoderError::ConfigMismatch(format!(
            "{} frequency bins but fft_size {} implies {}",
            mag.cols(),
            cfg.fft_size,
            cfg.n_bins()
        )));
    }
    Ok(())
}

/// `|| |STFT(y)| - mag ||_F` under the zero-padded analysis used by
/// Griffin-Lim.
pub fn spectral_error(samples: &[f64], mag: &Matrix, stft: &Stft) -> f64 {
    let spectra = stft.analyze_zero_padded(samples, mag.rows());
    let mut sum = 0.0;
    for (t, spec) in spectra.iter().enumerate() {
        for (c, m) in spec.iter().zip(mag.row(t)) {
            sum += (c.norm() - m).powi(2);
        }
    }
    sum.sqrt()
}

fn project(mag: &Matrix, spectra: &[Vec<Complex<f64>>]) -> Vec<Vec<Complex<f64>>> {
    spectra
        .iter()
        .enumerate()
        .map(|(t, spec)| {
            spec.iter()
                .zip(mag.row(t))
                .map(|(c, &m)| {
                    let n = c.norm();
                    if n > 0.0 {
                        c * (m / n)
                    } else {
                        Complex::new(m, 0.0)
                    }
                })
                .collect()
        })
        .collect()
}

fn griffin_lim_impl(
    mag: &Matrix,
    cfg: &MelConfig,
    n_iters: usize,
    seed: u64,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<Waveform, VocoderError> {
    cfg.validate()
        .map_err(|e| VocoderError::ConfigMismatch(e.to_string()))?;
    check_bins(mag, cfg)?;
    let stft = Stft::new(cfg.geometry());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spectra: Vec<Vec<Complex<f64>>> = (0..mag.rows())
        .map(|t| {
            mag.row(t)
                .iter()
                .map(|&m| Complex::from_polar(m, rng.random_range(0.0..2.0 * PI)))
                .collect()
        })
        .collect();
    let mut samples = stft.inverse_zero_padded(&spectra);
    for _ in 0..n_iters {
        let analysed = stft.analyze_zero_padded(&samples, mag.rows());
        if let Some(tr) = trace.as_deref_mut() {
            let err: f64 = analysed
                .iter()
                .enumerate()
                .map(|(t, spec)| {
                    spec.iter()
                        .zip(mag.row(t))
                        .map(|(c, m)| (c.norm() - m).powi(2))
                        .sum::<f64>()
                })
                .sum();
            tr.push(err.sqrt());
        }
        spectra = project(mag, &analysed);
        samples = stft.inverse_zero_padded(&spectra);
    }
    if let Some(tr) = trace {
        tr.push(spectral_error(&samples, mag, &stft));
    }
    Ok(Waveform::new(samples, cfg.sample_rate))
}

/// Griffin-Lim reconstruction from linear magnitudes with a seeded random
/// initial phase. Output length is `(T - 1) * hop`.
pub fn griffin_lim(mag: &Matrix, cfg: &MelConfig, n_iters: usize, seed: u64) -> Result<Waveform, VocoderError> {
    griffin_lim_impl(mag, cfg, n_iters, seed, None)
}

/// Like [`griffin_lim`], also returning the spectral error before each
/// iteration and after the last one.
pub fn griffin_lim_traced(
    mag: &Matrix,
    cfg: &MelConfig,
    n_iters: usize,
    seed: u64,
) -> Result<(Waveform, Vec<f64>), VocoderError> {
    let mut trace = Vec::with_capacity(n_iters + 1);
    let wave = griffin_lim_impl(mag, cfg, n_iters, seed, Some(&mut trace))?;
    Ok((wave, trace))
}

/// Mel to waveform with the default iteration count.
pub fn vocode(mel: &MelSpectrogram, seed: u64) -> Result<Waveform, VocoderError> {
    griffin_lim(&mel_to_linear(mel)?, &mel.config, DEFAULT_GL_ITERS, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::mel_spectrogram;

    fn sine(freq: f64, secs: f64, sr: u32) -> Waveform {
        let n = (secs * f64::from(sr)) as usize;
        Waveform::new(
            (0..n)
                .map(|i| 0.5 * (2.0 * PI * freq * i as f64 / f64::from(sr)).sin())
                .collect(),
            sr,
        )
    }

    fn argmax(v: &[f64]) -> usize {
        v.iter()
            .enumerate()
            .fold((0, f64::MIN), |b, (i, &x)| if x > b.1 { (i, x) } else { b })
            .0
    }

    #[test]
    fn silence_maps_to_zero() {
        let cfg = MelConfig::default();
        let mel = MelSpectrogram::from_log_values(Matrix::filled(5, 80, -1e3), cfg).unwrap();
        let lin = mel_to_linear(&mel).unwrap();
        assert_eq!(lin.shape(), (5, 513));
        assert!(lin.max() < 1e-6);
    }

    #[test]
    fn sine_round_trip_peak() {
        let cfg = MelConfig::default();
        let mel = mel_spectrogram(&sine(1000.0, 0.3, cfg.sample_rate), &cfg).unwrap();
        let lin = mel_to_linear(&mel).unwrap();
        let bin_hz = f64::from(cfg.sample_rate) / cfg.fft_size as f64;
        let target = 1000.0 / bin_hz;
        for t in 2..mel.n_frames() - 2 {
            let k = argmax(lin.row(t)) as f64;
            assert!((k - target).abs() <= 1.0, "frame {t}: bin {k} vs {target}");
        }
    }

    #[test]
    fn zero_magnitude_gives_silence() {
        let cfg = MelConfig::default();
        let wave = griffin_lim(&Matrix::zeros(87, 513), &cfg, 5, 1).unwrap();
        assert_eq!(wave.len(), 22016);
        assert!(wave.samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn bin_count_checked() {
        let cfg = MelConfig::default();
        assert!(griffin_lim(&Matrix::zeros(4, 100), &cfg, 1, 1).is_err());
    }
}
