//! Speaking-rate control by linear re-sampling of the mel along time.

use thiserror::Error;

use crate::matrix::Matrix;
use crate::signal::MelSpectrogram;
use crate::transform::{ConversionRate, RATE_MAX, RATE_MIN};

#[derive(Debug, Error)]
pub enum RateError {
    #[error("TooShort: re-sampling needs at least 2 frames, got {0}")]
    TooShort(usize),
    #[error("InvalidRate: clamped rate {0} outside [0.66, 1.33]")]
    InvalidRate(f64),
}

/// Output frame count `round(T / rate)`, at least 2.
pub fn resampled_len(n_frames: usize, rate: f64) -> usize {
    ((n_frames as f64 / rate).round() as usize).max(2)
}

/// Linear interpolation of the rows of `values` onto `out_len` evenly spaced
/// positions spanning the first to the last row.
pub fn resample_rows(values: &Matrix, out_len: usize) -> Matrix {
    let t = values.rows();
    if out_len == t {
        return values.clone();
    }
    let step = (t - 1) as f64 / (out_len - 1) as f64;
    Matrix::from_fn(out_len, values.cols(), |j, c| {
        if j == out_len - 1 {
            return values[(t - 1, c)];
        }
        let pos = j as f64 * step;
        let lo = (pos.floor() as usize).min(t - 1);
        let hi = (lo + 1).min(t - 1);
        let frac = pos - lo as f64;
        if frac == 0.0 {
            values[(lo, c)]
        } else {
            values[(lo, c)] + frac * (values[(hi, c)] - values[(lo, c)])
        }
    })
}

/// Shortens the mel when the target speaks faster (`rate > 1`) and
/// lengthens it when slower.
pub fn resample_mel(mel: &MelSpectrogram, rate: &ConversionRate) -> Result<MelSpectrogram, RateError> {
    let t = mel.n_frames();
    if t < 2 {
        return Err(RateError::TooShort(t));
    }
    if !(RATE_MIN..=RATE_MAX).contains(&rate.clamped) {
        return Err(RateError::InvalidRate(rate.clamped));
    }
    Ok(MelSpectrogram {
        values: resample_rows(&mel.values, resampled_len(t, rate.clamped)),
        config: mel.config,
    })
}
