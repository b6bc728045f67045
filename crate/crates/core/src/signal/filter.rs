//! Butterworth high-pass filtering as cascaded biquads designed with the
//! bilinear transform (frequency pre-warped at the cutoff).

use std::f64::consts::PI;

use super::{SignalError, Waveform};

/// Normalised biquad (`a0 = 1`), run in transposed direct form II.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// High-pass section with quality factor `q`.
    pub fn highpass(cutoff_hz: f64, sample_rate: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * cutoff_hz / sample_rate;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        Self {
            b0: (1.0 + cos) / 2.0 / a0,
            b1: -(1.0 + cos) / a0,
            b2: (1.0 + cos) / 2.0 / a0,
            a1: -2.0 * cos / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    pub fn process(&self, input: &[f64], output: &mut Vec<f64>) {
        output.clear();
        output.reserve(input.len());
        let (mut s1, mut s2) = (0.0, 0.0);
        for &x in input {
            let y = self.b0 * x + s1;
            s1 = self.b1 * x - self.a1 * y + s2;
            s2 = self.b2 * x - self.a2 * y;
            output.push(y);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiquadCascade {
    pub sections: Vec<Biquad>,
}

impl BiquadCascade {
    pub fn process(&self, input: &[f64]) -> Vec<f64> {
        let mut current = input.to_vec();
        let mut next = Vec::with_capacity(input.len());
        for section in &self.sections {
            section.process(&current, &mut next);
            std::mem::swap(&mut current, &mut next);
        }
        current
    }
}

/// Designs an even-order Butterworth high-pass. Supported orders: 2 and 4.
pub fn butterworth_highpass(
    cutoff_hz: f64,
    sample_rate: u32,
    order: usize,
) -> Result<BiquadCascade, SignalError> {
    let fs = f64::from(sample_rate);
    let nyquist = fs / 2.0;
    if !(cutoff_hz > 0.0 && cutoff_hz < nyquist) {
        return Err(SignalError::InvalidCutoff {
            cutoff_hz,
            nyquist_hz: nyquist,
        });
    }
    if order != 2 && order != 4 {
        return Err(SignalError::InvalidOrder(order));
    }
    // Pole pairs of the analog prototype: Q_k = 1 / (2 cos((2k + 1) pi / 2n)).
    let pairs = order / 2;
    let sections = (0..pairs)
        .map(|k| {
            let theta = (2 * k + 1) as f64 * PI / (2 * order) as f64;
            Biquad::highpass(cutoff_hz, fs, 1.0 / (2.0 * theta.cos()))
        })
        .collect();
    Ok(BiquadCascade { sections })
}

pub fn highpass_filter(
    wave: &Waveform,
    cutoff_hz: f64,
    order: usize,
) -> Result<Waveform, SignalError> {
    let cascade = butterworth_highpass(cutoff_hz, wave.sample_rate, order)?;
    Ok(Waveform::new(
        cascade.process(&wave.samples),
        wave.sample_rate,
    ))
}
