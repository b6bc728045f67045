//! Synthetic speech-like signals shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use prosody_vc::encoders::{Alignment, Segment};
use prosody_vc::signal::Waveform;

pub const SR: u32 = 22050;

/// Band-limited sawtooth at a fixed frequency.
pub fn sawtooth(freq: f64, secs: f64, amp: f64) -> Waveform {
    let n = (secs * f64::from(SR)) as usize;
    let harmonics = ((f64::from(SR) / 2.0) / freq).floor() as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / f64::from(SR);
            let s: f64 = (1..=harmonics)
                .map(|k| (2.0 * PI * freq * k as f64 * t).sin() / k as f64)
                .sum();
            amp * 2.0 / PI * s
        })
        .collect();
    Waveform::new(samples, SR)
}

/// Vowel-like harmonic signal: a gliding F0 from `f0_start` to `f0_end`,
/// harmonic amplitudes shaped by formant peaks, and short pauses that split
/// it into syllables of `syllable_secs`.
pub fn voice(f0_start: f64, f0_end: f64, formants: &[f64], secs: f64, syllable_secs: f64) -> Waveform {
    let n = (secs * f64::from(SR)) as usize;
    let mut phase = 0.0;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / f64::from(SR);
        let f0 = f0_start + (f0_end - f0_start) * t / secs;
        phase += 2.0 * PI * f0 / f64::from(SR);
        let pos = (t % syllable_secs) / syllable_secs;
        let gate = if pos > 0.85 { 0.0 } else { (PI * pos / 0.85).sin().powf(0.3) };
        let mut s = 0.0;
        let mut k = 1;
        while f0 * k as f64 <= 5000.0 {
            let fk = f0 * k as f64;
            let gain: f64 = formants
                .iter()
                .map(|&f| 1.0 / (1.0 + ((fk - f) / 150.0).powi(2)))
                .sum::<f64>()
                + 0.05;
            s += gain * (phase * k as f64).sin() / (k as f64).sqrt();
            k += 1;
        }
        samples.push(0.1 * gate * s);
    }
    Waveform::new(samples, SR)
}

/// Alignment with one segment per syllable, each split into two
/// phoneme-like halves, ending before the last frame time.
pub fn syllable_alignment(secs: f64, syllable_secs: f64) -> Alignment {
    let mut segments = Vec::new();
    let mut start = 0.0;
    let mut idx = 0;
    while start + syllable_secs <= secs + 1e-9 {
        let mid = start + syllable_secs / 2.0;
        segments.push(Segment { label: format!("A{idx}"), start, end: mid });
        segments.push(Segment { label: format!("B{idx}"), start: mid, end: start + syllable_secs * 0.85 });
        start += syllable_secs;
        idx += 1;
    }
    Alignment::new(segments).expect("valid alignment")
}
