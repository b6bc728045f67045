//! YIN fundamental-frequency tracker.

use serde::{Deserialize, Serialize};

use super::ProsodyError;
use crate::signal::{frames, reflect_pad, FrameGeometry, MelConfig, Waveform};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct F0Config {
    pub f0_min: f64,
    pub f0_max: f64,
    pub yin_threshold: f64,
    /// Frames at or below this RMS are unvoiced regardless of periodicity.
    pub rms_threshold: f64,
    pub geometry: FrameGeometry,
    pub sample_rate: u32,
}

impl F0Config {
    pub fn from_mel(mel: &MelConfig) -> Self {
        Self {
            f0_min: 50.0,
            f0_max: 600.0,
            yin_threshold: 0.15,
            rms_threshold: 1e-4,
            geometry: mel.geometry(),
            sample_rate: mel.sample_rate,
        }
    }

    fn lag_range(&self) -> Result<(usize, usize), ProsodyError> {
        if !(self.f0_min >= 50.0 && self.f0_max <= 600.0 && self.f0_min < self.f0_max) {
            return Err(ProsodyError::InvalidConfig(format!(
                "F0 range [{}, {}] must satisfy 50 <= f0_min < f0_max <= 600",
                self.f0_min, self.f0_max
            )));
        }
        let sr = f64::from(self.sample_rate);
        let tau_min = ((sr / self.f0_max).floor() as usize).max(2);
        let tau_max = (sr / self.f0_min).ceil() as usize;
        // One extra lag is needed for the parabolic fit at tau_max.
        if self.geometry.fft_size <= tau_max + 2 {
            return Err(ProsodyError::InvalidConfig(format!(
                "frame of {} samples cannot hold lags up to {tau_max}",
                self.geometry.fft_size
            )));
        }
        Ok((tau_min, tau_max))
    }
}

/// Per-frame F0 in Hz (0 where unvoiced) and voicing flags, one value per
/// mel frame.
pub fn extract_f0(wave: &Waveform, cfg: &F0Config) -> Result<(Vec<f64>, Vec<bool>), ProsodyError> {
    let (tau_min, tau_max) = cfg.lag_range()?;
    if wave.is_empty() {
        return Err(ProsodyError::TooShort("empty waveform".into()));
    }
    if wave.sample_rate != cfg.sample_rate {
        return Err(ProsodyError::InvalidConfig(format!(
            "waveform at {} Hz, F0 config expects {} Hz",
            wave.sample_rate, cfg.sample_rate
        )));
    }
    let g = cfg.geometry;
    let padded = reflect_pad(&wave.samples, g.pad());
    let n_frames = g.n_frames(wave.len());
    let sr = f64::from(cfg.sample_rate);
    let mut f0 = Vec::with_capacity(n_frames);
    let mut voiced = Vec::with_capacity(n_frames);
    for frame in frames(&padded, g.fft_size, g.hop, n_frames) {
        let rms = (frame.iter().map(|x| x * x).sum::<f64>() / frame.len() as f64).sqrt();
        let period = if rms > cfg.rms_threshold {
            yin_period(&frame, tau_min, tau_max, cfg.yin_threshold)
        } else {
            None
        };
        match period.map(|p| sr / p) {
            Some(hz) if hz >= cfg.f0_min && hz <= cfg.f0_max => {
                f0.push(hz);
                voiced.push(true);
            }
            _ => {
                f0.push(0.0);
                voiced.push(false);
            }
        }
    }
    Ok((f0, voiced))
}

/// Period in (fractional) samples from the cumulative-mean-normalised
/// difference function, or `None` when no lag dips below `threshold`.
pub fn yin_period(frame: &[f64], tau_min: usize, tau_max: usize, threshold: f64) -> Option<f64> {
    let integration = frame.len().checked_sub(tau_max + 2)?;
    if integration == 0 || tau_min < 1 || tau_min > tau_max {
        return None;
    }
    let last = tau_max + 1;
    let mut diff = vec![0.0; last + 1];
    for (tau, d) in diff.iter_mut().enumerate().skip(1) {
        *d = (0..integration)
            .map(|j| {
                let delta = frame[j] - frame[j + tau];
                delta * delta
            })
            .sum();
    }
    let mut cmnd = vec![1.0; last + 1];
    let mut running = 0.0;
    for tau in 1..=last {
        running += diff[tau];
        cmnd[tau] = if running > 0.0 {
            diff[tau] * tau as f64 / running
        } else {
            1.0
        };
    }

    let mut tau = (tau_min..=tau_max).find(|&t| cmnd[t] < threshold)?;
    while tau < tau_max && cmnd[tau + 1] < cmnd[tau] {
        tau += 1;
    }

    let (prev, cur, next) = (cmnd[tau - 1], cmnd[tau], cmnd[tau + 1]);
    let curvature = prev - 2.0 * cur + next;
    let shift = if curvature > 0.0 {
        (0.5 * (prev - next) / curvature).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    Some(tau as f64 + shift)
}
