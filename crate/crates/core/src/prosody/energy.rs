use super::ProsodyError;
use crate::signal::{frames, reflect_pad, FrameGeometry, Waveform};

pub const ENERGY_FLOOR: f64 = 1e-10;

/// `ln(max(sum x^2, 1e-10))` over one frame.
pub fn frame_log_energy(frame: &[f64]) -> f64 {
    frame.iter().map(|x| x * x).sum::<f64>().max(ENERGY_FLOOR).ln()
}

/// Log energy of each analysis window (`geometry.window` samples, centred
/// like the mel frames).
pub fn extract_log_energy(wave: &Waveform, geometry: &FrameGeometry) -> Result<Vec<f64>, ProsodyError> {
    if wave.is_empty() {
        return Err(ProsodyError::TooShort("empty waveform".into()));
    }
    let padded = reflect_pad(&wave.samples, geometry.pad());
    let n_frames = geometry.n_frames(wave.len());
    let offset = (geometry.fft_size - geometry.window) / 2;
    Ok(frames(&padded, geometry.fft_size, geometry.hop, n_frames)
        .iter()
        .map(|f| frame_log_energy(&f[offset..offset + geometry.window]))
        .collect())
}
