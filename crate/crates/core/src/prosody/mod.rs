//! Frame-level prosody: log-F0 with voicing, log energy, and the
//! unit-duration statistics used for speaking rate.

mod energy;
mod f0;
mod units;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal::{highpass_filter, FrameGeometry, MelConfig, SignalError, Waveform};

pub use energy::{extract_log_energy, frame_log_energy, ENERGY_FLOOR};
pub use f0::{extract_f0, yin_period, F0Config};
pub use units::{
    speaking_rate, train_codebook, train_unit_codebook, unitize, Codebook, UnitSequence,
    DEFAULT_CODEBOOK_SIZE, KMEANS_MAX_ITERS,
};

#[derive(Debug, Error)]
pub enum ProsodyError {
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("TooShort: {0}")]
    TooShort(String),
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("InsufficientData: {0}")]
    InsufficientData(String),
    #[error("DimMismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("EmptySequence: unit sequence has no pairs")]
    EmptySequence,
    #[error("InvalidTrack: {0}")]
    InvalidTrack(String),
}

/// Per-frame log-F0 (natural log of Hz, `0.0` where unvoiced), voicing
/// flags and log energy. All three tracks have the same length.
#[derive(Clone, Debug, PartialEq)]
pub struct ProsodyTrack {
    log_f0: Vec<f64>,
    voiced: Vec<bool>,
    log_energy: Vec<f64>,
}

impl ProsodyTrack {
    pub fn new(
        log_f0: Vec<f64>,
        voiced: Vec<bool>,
        log_energy: Vec<f64>,
    ) -> Result<Self, ProsodyError> {
        if log_f0.len() != voiced.len() || log_f0.len() != log_energy.len() {
            return Err(ProsodyError::InvalidTrack(format!(
                "track lengths differ: log_f0 {}, voiced {}, log_energy {}",
                log_f0.len(),
                voiced.len(),
                log_energy.len()
            )));
        }
        if let Some(i) = (0..voiced.len()).find(|&i| !voiced[i] && log_f0[i] != 0.0) {
            return Err(ProsodyError::InvalidTrack(format!(
                "unvoiced frame {i} carries log_f0 {}",
                log_f0[i]
            )));
        }
        if log_f0.iter().chain(&log_energy).any(|v| !v.is_finite()) {
            return Err(ProsodyError::InvalidTrack("non-finite value".into()));
        }
        Ok(Self {
            log_f0,
            voiced,
            log_energy,
        })
    }

    /// Builds a track from F0 in Hz; frames with `f0 <= 0` are unvoiced.
    pub fn from_f0_hz(f0: &[f64], log_energy: Vec<f64>) -> Result<Self, ProsodyError> {
        let voiced: Vec<bool> = f0.iter().map(|&f| f > 0.0).collect();
        let log_f0 = f0
            .iter()
            .map(|&f| if f > 0.0 { f.ln() } else { 0.0 })
            .collect();
        Self::new(log_f0, voiced, log_energy)
    }

    pub fn n_frames(&self) -> usize {
        self.log_f0.len()
    }

    pub fn log_f0(&self) -> &[f64] {
        &self.log_f0
    }

    pub fn voiced(&self) -> &[bool] {
        &self.voiced
    }

    pub fn log_energy(&self) -> &[f64] {
        &self.log_energy
    }

    pub fn n_voiced(&self) -> usize {
        self.voiced.iter().filter(|&&v| v).count()
    }

    /// F0 in Hz, `0.0` for unvoiced frames.
    pub fn f0_hz(&self) -> Vec<f64> {
        self.log_f0
            .iter()
            .zip(&self.voiced)
            .map(|(&l, &v)| if v { l.exp() } else { 0.0 })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProsodyConfig {
    pub f0: F0Config,
    /// Butterworth high-pass applied before F0 tracking; `None` skips it.
    pub highpass_cutoff_hz: Option<f64>,
    pub highpass_order: usize,
}

impl ProsodyConfig {
    pub fn from_mel(mel: &MelConfig) -> Self {
        Self {
            f0: F0Config::from_mel(mel),
            highpass_cutoff_hz: Some(50.0),
            highpass_order: 2,
        }
    }

    pub fn geometry(&self) -> FrameGeometry {
        self.f0.geometry
    }
}

/// Extracts the aligned prosody track. F0 is tracked on the high-passed
/// signal; energy is measured on the input as given.
pub fn extract_prosody(wave: &Waveform, cfg: &ProsodyConfig) -> Result<ProsodyTrack, ProsodyError> {
    let filtered;
    let f0_input = match cfg.highpass_cutoff_hz {
        Some(cutoff) => {
            filtered = highpass_filter(wave, cutoff, cfg.highpass_order)?;
            &filtered
        }
        None => wave,
    };
    let (f0, voiced) = extract_f0(f0_input, &cfg.f0)?;
    let log_energy = extract_log_energy(wave, &cfg.geometry())?;
    debug_assert_eq!(f0.len(), log_energy.len());
    let log_f0 = f0
        .iter()
        .zip(&voiced)
        .map(|(&f, &v)| if v { f.ln() } else { 0.0 })
        .collect();
    ProsodyTrack::new(log_f0, voiced, log_energy)
}
