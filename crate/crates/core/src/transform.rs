//! Global prosody conversion (voiced F0 mean transfer, conversion rate)
//! and user-defined prosody modulation.

use std::f64::consts::LN_2;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prosody::{ProsodyError, ProsodyTrack, UnitSequence};

pub const RATE_MIN: f64 = 0.66;
pub const RATE_MAX: f64 = 1.33;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("NoVoicedFrames: track has no voiced frame")]
    NoVoicedFrames,
    #[error("NonPositiveF0: frame {frame} would get F0 {value} Hz")]
    NonPositiveF0 { frame: usize, value: f64 },
    #[error("CurveLengthMismatch: curve has {curve} values, track has {track} frames")]
    CurveLengthMismatch { curve: usize, track: usize },
    #[error("EmptySequence: unit sequence has no pairs")]
    EmptySequence,
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Prosody(#[from] ProsodyError),
}

/// Mean F0 in Hz over voiced frames.
pub fn voiced_mean(track: &ProsodyTrack) -> Result<f64, TransformError> {
    let (sum, count) = track
        .log_f0()
        .iter()
        .zip(track.voiced())
        .filter(|(_, &v)| v)
        .fold((0.0, 0usize), |(s, c), (&l, _)| (s + l.exp(), c + 1));
    if count == 0 {
        return Err(TransformError::NoVoicedFrames);
    }
    Ok(sum / count as f64)
}

/// Shifts voiced F0 (in Hz) by `mu_trg - mu_src`; unvoiced frames keep the
/// zero sentinel.
pub fn f0_mean_transfer(src: &ProsodyTrack, mu_trg: f64) -> Result<ProsodyTrack, TransformError> {
    if !(mu_trg > 0.0 && mu_trg.is_finite()) {
        return Err(TransformError::InvalidSpec(format!(
            "target mean F0 must be positive, got {mu_trg}"
        )));
    }
    let mu_src = voiced_mean(src)?;
    let shift = mu_trg - mu_src;
    let mut log_f0 = src.log_f0().to_vec();
    if shift != 0.0 {
        for (i, (l, &v)) in log_f0.iter_mut().zip(src.voiced()).enumerate() {
            if v {
                let hz = l.exp() + shift;
                if hz <= 0.0 {
                    return Err(TransformError::NonPositiveF0 { frame: i, value: hz });
                }
                *l = hz.ln();
            }
        }
    }
    Ok(ProsodyTrack::new(
        log_f0,
        src.voiced().to_vec(),
        src.log_energy().to_vec(),
    )?)
}

/// Speaking-rate conversion ratio, raw and clamped to `[0.66, 1.33]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConversionRate {
    pub raw: f64,
    pub clamped: f64,
}

impl ConversionRate {
    pub fn new(raw: f64) -> Self {
        Self {
            raw,
            clamped: clamp_rate(raw),
        }
    }
}

pub fn clamp_rate(raw: f64) -> f64 {
    raw.clamp(RATE_MIN, RATE_MAX)
}

/// `mean_duration(src) / mean_duration(trg)`; above 1 the target talks faster.
pub fn conversion_rate(
    units_src: &UnitSequence,
    units_trg: &UnitSequence,
) -> Result<ConversionRate, TransformError> {
    let d_src = units_src
        .mean_duration()
        .map_err(|_| TransformError::EmptySequence)?;
    let d_trg = units_trg
        .mean_duration()
        .map_err(|_| TransformError::EmptySequence)?;
    Ok(ConversionRate::new(d_src / d_trg))
}

/// User prosody edits applied after global conversion.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModulationSpec {
    pub octave_shift: f64,
    pub semitone_shift: f64,
    /// Per-frame additive log-Hz curve.
    pub frame_f0_delta: Option<Vec<f64>>,
    pub energy_gain: f64,
    /// Replaces the measured conversion rate when set.
    pub rate_multiplier: Option<f64>,
}

impl ModulationSpec {
    pub fn octaves(octave_shift: f64) -> Self {
        Self {
            octave_shift,
            ..Self::default()
        }
    }

    /// Global log-F0 offset from the octave and semitone shifts.
    pub fn global_log_shift(&self) -> f64 {
        self.octave_shift * LN_2 + self.semitone_shift * LN_2 / 12.0
    }

    /// Global F0 multiplier `2^(octaves + semitones / 12)`.
    pub fn f0_factor(&self) -> f64 {
        2f64.powf(self.octave_shift + self.semitone_shift / 12.0)
    }

    pub fn validate(&self) -> Result<(), TransformError> {
        let scalars = [self.octave_shift, self.semitone_shift, self.energy_gain];
        if scalars.iter().any(|v| !v.is_finite()) {
            return Err(TransformError::InvalidSpec("non-finite shift".into()));
        }
        if let Some(r) = self.rate_multiplier {
            if !(r > 0.0 && r.is_finite()) {
                return Err(TransformError::InvalidSpec(format!(
                    "rate must be positive, got {r}"
                )));
            }
        }
        if let Some(curve) = &self.frame_f0_delta {
            if curve.iter().any(|v| !v.is_finite()) {
                return Err(TransformError::InvalidSpec("non-finite F0 curve".into()));
            }
        }
        Ok(())
    }

    /// Parses flat `key=value` text. Keys: `octave`, `semitones`,
    /// `energy_gain`, `rate`, `f0_curve` (a path, returned separately since
    /// the curve lives in an FTB file). `#` starts a comment.
    pub fn parse_key_values(text: &str) -> Result<(Self, Option<String>), TransformError> {
        let mut spec = Self::default();
        let mut curve_path = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                TransformError::InvalidSpec(format!("line {}: expected key=value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let number = || {
                value.parse::<f64>().map_err(|e| {
                    TransformError::InvalidSpec(format!("line {}: {key}: {e}", lineno + 1))
                })
            };
            match key {
                "octave" | "octave_shift" => spec.octave_shift = number()?,
                "semitones" | "semitone_shift" => spec.semitone_shift = number()?,
                "energy_gain" | "energy-gain" => spec.energy_gain = number()?,
                "rate" | "rate_multiplier" => spec.rate_multiplier = Some(number()?),
                "f0_curve" | "f0-curve" => curve_path = Some(value.to_string()),
                other => {
                    return Err(TransformError::InvalidSpec(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        spec.validate()?;
        Ok((spec, curve_path))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, Option<String>), TransformError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            TransformError::InvalidSpec(format!("{}: {e}", path.display()))
        })?;
        Self::parse_key_values(&text)
    }
}

/// Applies global and frame-level F0 shifts in the log domain to voiced
/// frames and the energy gain to every frame.
pub fn modulate(track: &ProsodyTrack, spec: &ModulationSpec) -> Result<ProsodyTrack, TransformError> {
    spec.validate()?;
    let n = track.n_frames();
    if let Some(curve) = &spec.frame_f0_delta {
        if curve.len() != n {
            return Err(TransformError::CurveLengthMismatch {
                curve: curve.len(),
                track: n,
            });
        }
    }
    let global = spec.global_log_shift();
    let log_f0 = (0..n)
        .map(|i| {
            let l = track.log_f0()[i];
            if !track.voiced()[i] {
                return l;
            }
            let local = spec.frame_f0_delta.as_ref().map_or(0.0, |c| c[i]);
            l + global + local
        })
        .collect();
    let log_energy = track
        .log_energy()
        .iter()
        .map(|&e| e + spec.energy_gain)
        .collect();
    Ok(ProsodyTrack::new(
        log_f0,
        track.voiced().to_vec(),
        log_energy,
    )?)
}
