use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{SignalError, Waveform};

const PCM16_SCALE: f64 = 32768.0;

/// Reads a mono PCM16 RIFF/WAVE file, normalising samples by 1/32768.
pub fn load_wav(path: impl AsRef<Path>) -> Result<Waveform, SignalError> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => SignalError::UnreadableFile {
            path: path.to_path_buf(),
            reason: io.to_string(),
        },
        other => SignalError::UnsupportedFormat(format!("{}: {other}", path.display())),
    })?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(SignalError::UnsupportedFormat(format!(
            "{}: {} channels, only mono is supported",
            path.display(),
            spec.channels
        )));
    }
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(SignalError::UnsupportedFormat(format!(
            "{}: {}-bit {:?}, only PCM16 is supported",
            path.display(),
            spec.bits_per_sample,
            spec.sample_format
        )));
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| f64::from(v) / PCM16_SCALE))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| SignalError::UnreadableFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    Ok(Waveform::new(samples, spec.sample_rate))
}

/// Writes mono PCM16. Samples outside [-1, 1] saturate at full scale.
pub fn save_wav(wave: &Waveform, path: impl AsRef<Path>) -> Result<(), SignalError> {
    let path = path.as_ref();
    let unwritable = |e: hound::Error| SignalError::UnwritableFile {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let spec = WavSpec {
        channels: 1,
        sample_rate: wave.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec).map_err(unwritable)?;
    for &x in &wave.samples {
        writer.write_sample(quantize(x)).map_err(unwritable)?;
    }
    writer.finalize().map_err(unwritable)
}

fn quantize(x: f64) -> i16 {
    let x = if x.is_nan() { 0.0 } else { x.clamp(-1.0, 1.0) };
    (x * PCM16_SCALE)
        .round()
        .clamp(f64::from(i16::MIN), f64::from(i16::MAX)) as i16
}
