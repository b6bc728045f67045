//! Audio I/O, filtering and spectral analysis primitives.

mod filter;
mod mel;
mod stft;
mod wav;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use filter::{butterworth_highpass, highpass_filter, Biquad, BiquadCascade};
pub use mel::{hz_to_mel, mel_filterbank, mel_spectrogram, mel_to_hz, MelSpectrogram};
pub use stft::{frame_count, frames, hann_window, reflect_pad, Stft};
pub use wav::{load_wav, save_wav};

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("UnreadableFile: {path}: {reason}")]
    UnreadableFile { path: PathBuf, reason: String },
    #[error("UnsupportedFormat: {0}")]
    UnsupportedFormat(String),
    #[error("UnwritableFile: {path}: {reason}")]
    UnwritableFile { path: PathBuf, reason: String },
    #[error("InvalidCutoff: {cutoff_hz} Hz is outside (0, {nyquist_hz}) Hz")]
    InvalidCutoff { cutoff_hz: f64, nyquist_hz: f64 },
    #[error("InvalidOrder: Butterworth order must be 2 or 4, got {0}")]
    InvalidOrder(usize),
    #[error("TooShort: {0}")]
    TooShort(String),
    #[error("ConfigMismatch: {0}")]
    ConfigMismatch(String),
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
}

/// Mono audio with its sample rate.
#[derive(Clone, Debug, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self::new(
            self.samples.iter().map(|&x| gain * x).collect(),
            self.sample_rate,
        )
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64).sqrt()
    }
}

/// Analysis framing shared by the mel, F0 and energy tracks so that all
/// three produce the same number of frames for a given waveform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameGeometry {
    pub fft_size: usize,
    pub hop: usize,
    pub window: usize,
}

impl FrameGeometry {
    /// Frames are centred on `i * hop` after padding by half the FFT size.
    pub fn n_frames(&self, n_samples: usize) -> usize {
        frame_count(n_samples, self.hop)
    }

    pub fn pad(&self) -> usize {
        self.fft_size / 2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MelConfig {
    pub sample_rate: u32,
    pub fft_size: usize,
    pub hop: usize,
    pub window: usize,
    pub n_mels: usize,
    pub fmin: f64,
    pub fmax: f64,
    pub log_floor: f64,
}

impl Default for MelConfig {
    fn default() -> Self {
        Self {
            sample_rate: 22050,
            fft_size: 1024,
            hop: 256,
            window: 1024,
            n_mels: 80,
            fmin: 0.0,
            fmax: 8000.0,
            log_floor: 1e-10,
        }
    }
}

impl MelConfig {
    pub fn validate(&self) -> Result<(), SignalError> {
        let bad = |msg: String| Err(SignalError::InvalidConfig(msg));
        if self.sample_rate == 0 {
            return bad("sample_rate must be positive".into());
        }
        if self.hop == 0 || self.hop > self.window || self.window > self.fft_size {
            return bad(format!(
                "need 0 < hop <= window <= fft_size, got hop {} window {} fft_size {}",
                self.hop, self.window, self.fft_size
            ));
        }
        let nyquist = f64::from(self.sample_rate) / 2.0;
        if !(0.0 <= self.fmin && self.fmin < self.fmax && self.fmax <= nyquist) {
            return bad(format!(
                "need 0 <= fmin < fmax <= {nyquist}, got [{}, {}]",
                self.fmin, self.fmax
            ));
        }
        if self.n_mels == 0 {
            return bad("n_mels must be at least 1".into());
        }
        if !(self.log_floor > 0.0) {
            return bad("log_floor must be positive".into());
        }
        Ok(())
    }

    pub fn geometry(&self) -> FrameGeometry {
        FrameGeometry {
            fft_size: self.fft_size,
            hop: self.hop,
            window: self.window,
        }
    }

    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn log_floor_value(&self) -> f64 {
        self.log_floor.ln()
    }

    /// Start time in seconds of frame `i`.
    pub fn frame_time(&self, i: usize) -> f64 {
        (i * self.hop) as f64 / f64::from(self.sample_rate)
    }
}
