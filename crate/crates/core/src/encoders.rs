//! Content prior and speaker embedding.
//!
//! The average-mel prior replaces every aligned phoneme segment by its mean
//! frame; the speaker embedding is a fixed random projection of per-band
//! time statistics.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::matrix::Matrix;
use crate::nn::fill_normal;
use crate::signal::MelSpectrogram;

/// Seed of the fixed speaker projection. Changing it changes every embedding.
const SPEAKER_PROJECTION_SEED: u64 = 0x5eed_5bea_4e25_0f0f;

pub const DEFAULT_SPEAKER_DIM: usize = 64;

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("UnreadableFile: {path}: {reason}")]
    UnreadableFile { path: PathBuf, reason: String },
    #[error("ParseError: line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("NonMonotonic: line {line}: segment starts before the previous one")]
    NonMonotonic { line: usize },
    #[error("Overlap: line {line}: segment overlaps the previous one")]
    Overlap { line: usize },
    #[error("OutOfRange: {0}")]
    OutOfRange(String),
    #[error("TooShort: {0}")]
    TooShort(String),
    #[error("InvalidEmbedding: {0}")]
    InvalidEmbedding(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub label: String,
    pub start: f64,
    pub end: f64,
}

/// Ordered, non-overlapping phoneme segments in seconds. Gaps are allowed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Alignment {
    segments: Vec<Segment>,
}

impl Alignment {
    pub fn new(segments: Vec<Segment>) -> Result<Self, EncoderError> {
        for (i, s) in segments.iter().enumerate() {
            let line = i + 1;
            if !(s.start >= 0.0 && s.start < s.end) {
                return Err(EncoderError::ParseError {
                    line,
                    reason: format!("need 0 <= start < end, got [{}, {}]", s.start, s.end),
                });
            }
            if let Some(prev) = i.checked_sub(1).map(|j| &segments[j]) {
                if s.start < prev.start {
                    return Err(EncoderError::NonMonotonic { line });
                }
                if s.start < prev.end {
                    return Err(EncoderError::Overlap { line });
                }
            }
        }
        Ok(Self { segments })
    }

    /// Parses `label<TAB>start<TAB>end` rows. Blank lines are skipped.
    pub fn parse_tsv(text: &str) -> Result<Self, EncoderError> {
        let mut segments: Vec<Segment> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 3 {
                return Err(EncoderError::ParseError {
                    line,
                    reason: format!("expected 3 tab-separated fields, got {}", fields.len()),
                });
            }
            let number = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| EncoderError::ParseError {
                    line,
                    reason: format!("{s:?}: {e}"),
                })
            };
            let segment = Segment {
                label: fields[0].trim().to_string(),
                start: number(fields[1])?,
                end: number(fields[2])?,
            };
            if !(segment.start >= 0.0 && segment.start < segment.end) {
                return Err(EncoderError::ParseError {
                    line,
                    reason: format!("need 0 <= start < end, got [{}, {}]", segment.start, segment.end),
                });
            }
            if let Some(prev) = segments.last() {
                if segment.start < prev.start {
                    return Err(EncoderError::NonMonotonic { line });
                }
                if segment.start < prev.end {
                    return Err(EncoderError::Overlap { line });
                }
            }
            segments.push(segment);
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn to_tsv(&self) -> String {
        self.segments
            .iter()
            .map(|s| format!("{}\t{}\t{}\n", s.label, s.start, s.end))
            .collect()
    }
}

pub fn load_alignment(path: impl AsRef<Path>) -> Result<Alignment, EncoderError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| EncoderError::UnreadableFile {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    Alignment::parse_tsv(&text)
}

/// Segment index of every frame; `None` marks frames in a gap. Runs of
/// equal keys are averaged together, so each contiguous gap is its own group.
fn frame_segments(mel: &MelSpectrogram, align: &Alignment) -> Result<Vec<Option<usize>>, EncoderError> {
    let cfg = &mel.config;
    let n = mel.n_frames();
    let duration = cfg.frame_time(n);
    if let Some(s) = align.segments().iter().find(|s| s.end > duration + 1e-6) {
        return Err(EncoderError::OutOfRange(format!(
            "segment {:?} ends at {} s but the mel covers {duration} s",
            s.label, s.end
        )));
    }
    let segments = align.segments();
    let mut seg = 0;
    Ok((0..n)
        .map(|i| {
            let time = cfg.frame_time(i);
            while seg < segments.len() && segments[seg].end <= time {
                seg += 1;
            }
            segments
                .get(seg)
                .filter(|s| s.start <= time)
                .map(|_| seg)
        })
        .collect())
}

/// Replaces each frame with the mean frame of its aligned segment (gap
/// frames are averaged per contiguous gap).
pub fn average_mel_target(mel: &MelSpectrogram, align: &Alignment) -> Result<MelSpectrogram, EncoderError> {
    let groups = frame_segments(mel, align)?;
    let bands = mel.n_mels();
    let mut out = mel.values.clone();
    let mut start = 0;
    while start < groups.len() {
        let mut end = start + 1;
        while end < groups.len() && groups[end] == groups[start] {
            end += 1;
        }
        let count = (end - start) as f64;
        let mut mean = vec![0.0; bands];
        for t in start..end {
            for (m, v) in mean.iter_mut().zip(mel.values.row(t)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= count;
        }
        for t in start..end {
            out.row_mut(t).copy_from_slice(&mean);
        }
        start = end;
    }
    Ok(MelSpectrogram {
        values: out,
        config: mel.config,
    })
}

/// Unit-norm global speaker vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeakerEmbedding(Vec<f64>);

impl SpeakerEmbedding {
    /// L2-normalises `values`.
    pub fn from_raw(values: Vec<f64>) -> Result<Self, EncoderError> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(EncoderError::InvalidEmbedding(format!(
                "cannot normalise vector with norm {norm}"
            )));
        }
        Ok(Self(values.into_iter().map(|v| v / norm).collect()))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn cosine(&self, other: &SpeakerEmbedding) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }
}

fn speaker_projection(out_dim: usize, in_dim: usize) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(SPEAKER_PROJECTION_SEED ^ ((out_dim as u64) << 32 | in_dim as u64));
    let mut data = vec![0.0; out_dim * in_dim];
    fill_normal(&mut data, (1.0 / in_dim as f64).sqrt(), &mut rng);
    Matrix::from_vec(out_dim, in_dim, data)
}

/// Per-band mean and standard deviation over time, projected to `dim`
/// values and L2-normalised. The band means are taken relative to their
/// average, so overall loudness does not move the embedding.
pub fn speaker_embedding(mel: &MelSpectrogram, dim: usize) -> Result<SpeakerEmbedding, EncoderError> {
    let t = mel.n_frames();
    if t < 2 {
        return Err(EncoderError::TooShort(format!(
            "speaker statistics need at least 2 frames, got {t}"
        )));
    }
    let bands = mel.n_mels();
    let mut stats = vec![0.0; 2 * bands];
    for row in mel.values.iter_rows() {
        for (s, v) in stats[..bands].iter_mut().zip(row) {
            *s += v;
        }
    }
    for s in &mut stats[..bands] {
        *s /= t as f64;
    }
    let means = stats[..bands].to_vec();
    let level = means.iter().sum::<f64>() / bands as f64;
    for row in mel.values.iter_rows() {
        for b in 0..bands {
            let d = row[b] - means[b];
            stats[bands + b] += d * d;
        }
    }
    for s in &mut stats[bands..] {
        *s = (*s / t as f64).sqrt();
    }
    let proj = speaker_projection(dim, 2 * bands);
    let project = |stats: &[f64]| -> Vec<f64> {
        proj.iter_rows()
            .map(|w| w.iter().zip(stats).map(|(a, b)| a * b).sum())
            .collect()
    };
    let mut centred = stats.clone();
    for s in &mut centred[..bands] {
        *s -= level;
    }
    if centred.iter().all(|&v| v == 0.0) {
        // A spectrally flat, static input (e.g. silence) has only its level.
        return SpeakerEmbedding::from_raw(project(&stats));
    }
    SpeakerEmbedding::from_raw(project(&centred))
}
