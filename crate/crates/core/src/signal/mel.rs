//! Log-mel spectrogram on the Slaney mel scale with area-normalised
//! triangular filters.

use super::stft::Stft;
use super::{MelConfig, SignalError, Waveform};
use crate::matrix::Matrix;

const F_SP: f64 = 200.0 / 3.0;
const MIN_LOG_HZ: f64 = 1000.0;
const MIN_LOG_MEL: f64 = MIN_LOG_HZ / F_SP;

fn log_step() -> f64 {
    6.4f64.ln() / 27.0
}

/// Slaney mel scale: linear below 1 kHz, logarithmic above.
pub fn hz_to_mel(hz: f64) -> f64 {
    if hz < MIN_LOG_HZ {
        hz / F_SP
    } else {
        MIN_LOG_MEL + (hz / MIN_LOG_HZ).ln() / log_step()
    }
}

pub fn mel_to_hz(mel: f64) -> f64 {
    if mel < MIN_LOG_MEL {
        mel * F_SP
    } else {
        MIN_LOG_HZ * (log_step() * (mel - MIN_LOG_MEL)).exp()
    }
}

/// `n_mels + 2` band edges in Hz; band `m` peaks at edge `m + 1`.
pub(crate) fn band_edges(cfg: &MelConfig) -> Vec<f64> {
    let lo = hz_to_mel(cfg.fmin);
    let hi = hz_to_mel(cfg.fmax);
    let n = cfg.n_mels + 2;
    (0..n)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

/// `n_mels x (fft_size/2 + 1)` filterbank.
pub fn mel_filterbank(cfg: &MelConfig) -> Matrix {
    let edges = band_edges(cfg);
    let n_bins = cfg.n_bins();
    let bin_hz = f64::from(cfg.sample_rate) / cfg.fft_size as f64;
    Matrix::from_fn(cfg.n_mels, n_bins, |m, k| {
        let f = k as f64 * bin_hz;
        let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
        let rising = (f - lo) / (mid - lo);
        let falling = (hi - f) / (hi - mid);
        let w = rising.min(falling).max(0.0);
        w * 2.0 / (hi - lo)
    })
}

/// Frames x bands matrix of `ln(max(mel_energy, log_floor))`.
#[derive(Clone, Debug, PartialEq)]
pub struct MelSpectrogram {
    pub values: Matrix,
    pub config: MelConfig,
}

impl MelSpectrogram {
    /// Wraps log-mel values, raising anything below the floor (or NaN) to it.
    pub fn from_log_values(values: Matrix, config: MelConfig) -> Result<Self, SignalError> {
        if values.cols() != config.n_mels {
            return Err(SignalError::ConfigMismatch(format!(
                "{} bands but n_mels = {}",
                values.cols(),
                config.n_mels
            )));
        }
        if values.rows() == 0 {
            return Err(SignalError::TooShort("mel spectrogram needs T >= 1".into()));
        }
        let floor = config.log_floor_value();
        let values = values.map(|v| if v >= floor { v } else { floor });
        if !values.is_finite() {
            return Err(SignalError::InvalidConfig(
                "mel spectrogram has non-finite values".into(),
            ));
        }
        Ok(Self { values, config })
    }

    pub fn n_frames(&self) -> usize {
        self.values.rows()
    }

    pub fn n_mels(&self) -> usize {
        self.values.cols()
    }
}

pub fn mel_spectrogram(wave: &Waveform, cfg: &MelConfig) -> Result<MelSpectrogram, SignalError> {
    cfg.validate()?;
    if wave.sample_rate != cfg.sample_rate {
        return Err(SignalError::ConfigMismatch(format!(
            "waveform at {} Hz, config expects {} Hz",
            wave.sample_rate, cfg.sample_rate
        )));
    }
    if wave.is_empty() {
        return Err(SignalError::TooShort("empty waveform".into()));
    }
    let power = Stft::new(cfg.geometry()).power(&wave.samples);
    let bank = mel_filterbank(cfg);
    let floor = cfg.log_floor;
    let values = Matrix::from_fn(power.rows(), cfg.n_mels, |t, m| {
        let energy: f64 = bank
            .row(m)
            .iter()
            .zip(power.row(t))
            .map(|(w, p)| w * p)
            .sum();
        energy.max(floor).ln()
    });
    Ok(MelSpectrogram {
        values,
        config: *cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(freq: f64, secs: f64, amp: f64) -> Waveform {
        let sr = 22050u32;
        let n = (secs * f64::from(sr)) as usize;
        Waveform::new(
            (0..n)
                .map(|i| amp * (2.0 * PI * freq * i as f64 / f64::from(sr)).sin())
                .collect(),
            sr,
        )
    }

    #[test]
    fn mel_scale_round_trip() {
        for hz in [0.0, 100.0, 999.0, 1000.0, 4000.0, 8000.0] {
            assert!((mel_to_hz(hz_to_mel(hz)) - hz).abs() < 1e-9);
        }
        assert!((hz_to_mel(1000.0) - 15.0).abs() < 1e-12);
    }

    #[test]
    fn silence_is_floor() {
        let cfg = MelConfig::default();
        let mel = mel_spectrogram(&Waveform::new(vec![0.0; 22050], 22050), &cfg).unwrap();
        let floor = cfg.log_floor.ln();
        assert!(mel.values.as_slice().iter().all(|&v| v == floor));
        assert_eq!(mel.n_frames(), 87);
    }

    #[test]
    fn framing_arithmetic() {
        let cfg = MelConfig::default();
        let mel = mel_spectrogram(&Waveform::new(vec![0.1; 4 * 256], 22050), &cfg).unwrap();
        assert_eq!(mel.n_frames(), 5);
        assert_eq!(mel.n_mels(), 80);
    }

    #[test]
    fn one_khz_peaks_in_nearest_band() {
        let cfg = MelConfig::default();
        let mel = mel_spectrogram(&sine(1000.0, 1.0, 0.5), &cfg).unwrap();
        // Band centres straight from the mel formula (fmin = 0).
        let centres: Vec<f64> = (1..=cfg.n_mels)
            .map(|i| {
                let m = hz_to_mel(cfg.fmax) * i as f64 / (cfg.n_mels + 1) as f64;
                mel_to_hz(m)
            })
            .collect();
        let nearest = centres
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - 1000.0).abs().total_cmp(&(b.1 - 1000.0).abs()))
            .unwrap()
            .0;
        // Edge frames see the mirrored padding.
        for t in 2..mel.n_frames() - 2 {
            let row = mel.values.row(t);
            let argmax = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            assert_eq!(argmax, nearest, "frame {t}");
        }
    }

    #[test]
    fn doubling_amplitude_adds_ln4() {
        let cfg = MelConfig::default();
        let wave = sine(440.0, 0.5, 0.2);
        let a = mel_spectrogram(&wave, &cfg).unwrap();
        let b = mel_spectrogram(&wave.scaled(2.0), &cfg).unwrap();
        let floor = cfg.log_floor.ln();
        for (x, y) in a.values.as_slice().iter().zip(b.values.as_slice()) {
            if *x > floor && *y > floor {
                assert!((y - x - 4f64.ln()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn config_mismatch_and_empty() {
        let cfg = MelConfig::default();
        assert!(matches!(
            mel_spectrogram(&Waveform::new(vec![0.0; 100], 16000), &cfg),
            Err(SignalError::ConfigMismatch(_))
        ));
        assert!(matches!(
            mel_spectrogram(&Waveform::new(vec![], 22050), &cfg),
            Err(SignalError::TooShort(_))
        ));
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = MelConfig {
            hop: 2048,
            ..MelConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = MelConfig {
            fmax: 20000.0,
            ..MelConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
