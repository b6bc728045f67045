//! Objective metrics and the modulation sweep over F0 or speaking-rate
//! levels.

use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::diffusion::Checkpoint;
use crate::encoders::Alignment;
use crate::error::{Error, Result};
use crate::pipeline::{analyze, convert, ConvertOptions};
use crate::prosody::ProsodyTrack;
use crate::signal::{MelSpectrogram, Waveform};
use crate::transform::{voiced_mean, ModulationSpec};

pub const DEFAULT_F0_LEVELS: [f64; 5] = [-0.5, -0.25, 0.0, 0.25, 0.5];
pub const DEFAULT_RATE_LEVELS: [f64; 5] = [0.66, 0.75, 1.0, 1.20, 1.33];
pub const SWEEP_CSV_HEADER: &str = "level,requested_mean_hz,achieved_mean_hz,f0_rmse_hz,out_frames";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("LengthMismatch: {a} vs {b} frames")]
    LengthMismatch { a: usize, b: usize },
    #[error("NoCommonVoiced: tracks share no voiced frame")]
    NoCommonVoiced,
    #[error("ShapeMismatch: {a:?} vs {b:?}")]
    ShapeMismatch { a: (usize, usize), b: (usize, usize) },
}

/// RMSE in Hz over frames voiced in both tracks.
pub fn f0_rmse(a: &ProsodyTrack, b: &ProsodyTrack) -> Result<f64, EvalError> {
    if a.n_frames() != b.n_frames() {
        return Err(EvalError::LengthMismatch {
            a: a.n_frames(),
            b: b.n_frames(),
        });
    }
    let (fa, fb) = (a.f0_hz(), b.f0_hz());
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..a.n_frames() {
        if a.voiced()[i] && b.voiced()[i] {
            sum += (fa[i] - fb[i]).powi(2);
            count += 1;
        }
    }
    if count == 0 {
        return Err(EvalError::NoCommonVoiced);
    }
    Ok((sum / count as f64).sqrt())
}

/// `|achieved - requested| / requested`.
pub fn sr_ratio_error(requested: f64, achieved: f64) -> f64 {
    (achieved - requested).abs() / requested
}

/// Mean over frames of the L2 norm of the log-mel difference.
pub fn log_spectral_distance(a: &MelSpectrogram, b: &MelSpectrogram) -> Result<f64, EvalError> {
    let (sa, sb) = (a.values.shape(), b.values.shape());
    if sa != sb {
        return Err(EvalError::ShapeMismatch { a: sa, b: sb });
    }
    if sa.0 == 0 {
        return Ok(0.0);
    }
    let total: f64 = a
        .values
        .iter_rows()
        .zip(b.values.iter_rows())
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
        .sum();
    Ok(total / sa.0 as f64)
}

/// Nearest-frame re-timing of a track to `n` frames, matching the
/// endpoints-preserving grid used by rate control.
pub fn retime_track(track: &ProsodyTrack, n: usize) -> Result<ProsodyTrack> {
    let t = track.n_frames();
    if n == t || t == 0 {
        return Ok(track.clone());
    }
    let src = |j: usize| -> usize {
        if n < 2 {
            0
        } else {
            ((j as f64 * (t - 1) as f64 / (n - 1) as f64).round() as usize).min(t - 1)
        }
    };
    let idx: Vec<usize> = (0..n).map(src).collect();
    Ok(ProsodyTrack::new(
        idx.iter().map(|&i| track.log_f0()[i]).collect(),
        idx.iter().map(|&i| track.voiced()[i]).collect(),
        idx.iter().map(|&i| track.log_energy()[i]).collect(),
    )?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    /// Levels are octave shifts of the converted F0.
    F0,
    /// Levels replace the conversion rate, with rate control enabled.
    Rate,
}

impl SweepMode {
    pub fn default_levels(self) -> Vec<f64> {
        match self {
            SweepMode::F0 => DEFAULT_F0_LEVELS.to_vec(),
            SweepMode::Rate => DEFAULT_RATE_LEVELS.to_vec(),
        }
    }
}

/// An input pair for the sweep.
#[derive(Clone, Debug)]
pub struct SweepPair {
    pub src: Waveform,
    pub trg: Waveform,
    pub src_align: Alignment,
}

/// One CSV row. Means are averaged over pairs, frames summed; metrics that
/// are undefined for every pair (no voiced output) are NaN.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub level: f64,
    pub requested_mean_hz: f64,
    pub achieved_mean_hz: f64,
    pub f0_rmse_hz: f64,
    pub out_frames: usize,
}

fn mean_defined(values: &[f64]) -> f64 {
    let defined: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if defined.is_empty() {
        f64::NAN
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    }
}

fn run_level(
    ckpt: &Checkpoint,
    pairs: &[SweepPair],
    mode: SweepMode,
    level: f64,
    seed: u64,
) -> Result<SweepRow> {
    let mut requested = Vec::new();
    let mut achieved = Vec::new();
    let mut rmse = Vec::new();
    let mut frames = 0;
    for pair in pairs {
        let spec = match mode {
            SweepMode::F0 => ModulationSpec::octaves(level),
            SweepMode::Rate => ModulationSpec {
                rate_multiplier: Some(level),
                ..ModulationSpec::default()
            },
        };
        let opts = ConvertOptions {
            spec,
            rate_control: mode == SweepMode::Rate,
            seed,
            ..ConvertOptions::default()
        };
        let out = convert(ckpt, &pair.src, &pair.trg, &pair.src_align, &opts)?;
        let (_, got) = analyze(&out.wave, &ckpt.mel)?;
        let wanted = retime_track(&out.conditioning, got.n_frames())?;
        requested.push(out.report.requested_mean_hz);
        achieved.push(voiced_mean(&got).unwrap_or(f64::NAN));
        rmse.push(f0_rmse(&wanted, &got).unwrap_or(f64::NAN));
        frames += out.report.out_frames;
    }
    Ok(SweepRow {
        level,
        requested_mean_hz: mean_defined(&requested),
        achieved_mean_hz: mean_defined(&achieved),
        f0_rmse_hz: mean_defined(&rmse),
        out_frames: frames,
    })
}

/// Runs the full conversion for every level and pair. Levels run on
/// separate threads; rows come back in level order.
pub fn modulation_sweep(
    ckpt: &Checkpoint,
    pairs: &[SweepPair],
    mode: SweepMode,
    levels: &[f64],
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairList("no pairs to sweep".into()));
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = levels
            .iter()
            .map(|&level| scope.spawn(move || run_level(ckpt, pairs, mode, level, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    })
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v}")
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_value(r.level),
            fmt_value(r.requested_mean_hz),
            fmt_value(r.achieved_mean_hz),
            fmt_value(r.f0_rmse_hz),
            r.out_frames
        ));
    }
    out
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let fail = |e: std::io::Error| Error::UnwritableFile {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let mut file = std::fs::File::create(path).map_err(fail)?;
    file.write_all(sweep_csv(rows).as_bytes()).map_err(fail)
}
