mod common;

use proptest::prelude::*;
use prosody_vc::matrix::Matrix;
use prosody_vc::rate::{resample_mel, resampled_len};
use prosody_vc::signal::{mel_spectrogram, MelConfig, MelSpectrogram, Stft, Waveform};
use prosody_vc::transform::ConversionRate;
use prosody_vc::vocoder::{griffin_lim, griffin_lim_traced, mel_to_linear, DEFAULT_GL_ITERS};
use rustfft::{num_complex::Complex, FftPlanner};

fn random_mel(t: usize, seed: u64) -> MelSpectrogram {
    let mut s = seed;
    let values = Matrix::from_fn(t, 80, |_, _| {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        -20.0 + 20.0 * ((s >> 11) as f64 / (1u64 << 53) as f64)
    });
    MelSpectrogram::from_log_values(values, MelConfig::default()).unwrap()
}

#[test]
fn table_rate_grid_lengths() {
    let mel = random_mel(100, 1);
    for (rate, want) in [(0.66, 152), (0.75, 133), (1.20, 83), (1.33, 75)] {
        let out = resample_mel(&mel, &ConversionRate::new(rate)).unwrap();
        assert_eq!(out.n_frames(), want);
        assert_eq!(out.n_frames(), (100.0 / rate).round() as usize);
        assert_eq!(out.values.row(0), mel.values.row(0));
        assert_eq!(out.values.row(want - 1), mel.values.row(99));
    }
    let same = resample_mel(&mel, &ConversionRate::new(1.0)).unwrap();
    assert_eq!(same.values, mel.values);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn length_direction_and_bounds(t in 8usize..200, rate in 0.66f64..1.33, seed in any::<u64>()) {
        let mel = random_mel(t, seed);
        let out = resample_mel(&mel, &ConversionRate::new(rate)).unwrap();
        let n = out.n_frames();
        prop_assert_eq!(n, resampled_len(t, rate));
        if n != t {
            prop_assert_eq!(rate > 1.0, n < t);
        }
        for j in 0..n {
            let pos = if n > 1 { j as f64 * (t - 1) as f64 / (n - 1) as f64 } else { 0.0 };
            let (lo, hi) = (pos.floor() as usize, (pos.ceil() as usize).min(t - 1));
            for c in 0..80 {
                let (a, b) = (mel.values[(lo, c)], mel.values[(hi, c)]);
                let v = out.values[(j, c)];
                prop_assert!(v >= a.min(b) - 1e-12 && v <= a.max(b) + 1e-12);
            }
        }
    }
}

fn sine(freq: f64, secs: f64) -> Waveform {
    let n = (secs * f64::from(common::SR)) as usize;
    Waveform::new(
        (0..n)
            .map(|i| 0.5 * (2.0 * std::f64::consts::PI * freq * i as f64 / f64::from(common::SR)).sin())
            .collect(),
        common::SR,
    )
}

fn dominant_bin(samples: &[f64]) -> usize {
    let n = samples.len();
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    (1..n / 2).max_by(|&a, &b| buf[a].norm().partial_cmp(&buf[b].norm()).unwrap()).unwrap()
}

#[test]
fn griffin_lim_reconstructs_1khz() {
    let cfg = MelConfig::default();
    let x = sine(1000.0, 1.0);
    let stft = Stft::new(cfg.geometry());
    let mag = stft.power(&x.samples).map(f64::sqrt);
    let y = griffin_lim(&mag, &cfg, DEFAULT_GL_ITERS, 3).unwrap();
    assert_eq!(y.len(), (mag.rows() - 1) * cfg.hop);
    let n = y.len();
    let bin = dominant_bin(&y.samples);
    let bin_hz = f64::from(cfg.sample_rate) / n as f64;
    assert!((bin as f64 * bin_hz - 1000.0).abs() <= bin_hz, "peak at {} Hz", bin as f64 * bin_hz);
}

#[test]
fn griffin_lim_error_non_increasing() {
    let cfg = MelConfig::default();
    let wave = common::voice(130.0, 170.0, &[700.0, 1200.0], 0.6, 0.3);
    let mel = mel_spectrogram(&wave, &cfg).unwrap();
    let mag = mel_to_linear(&mel).unwrap();
    let (_, trace) = griffin_lim_traced(&mag, &cfg, 30, 11).unwrap();
    assert_eq!(trace.len(), 31);
    for w in trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-6, "{} -> {}", w[0], w[1]);
    }
    assert!(trace[30] < trace[0]);
}

#[test]
fn griffin_lim_deterministic_per_seed() {
    let cfg = MelConfig::default();
    let mel = mel_spectrogram(&sine(440.0, 0.3), &cfg).unwrap();
    let mag = mel_to_linear(&mel).unwrap();
    let a = griffin_lim(&mag, &cfg, 10, 5).unwrap();
    let b = griffin_lim(&mag, &cfg, 10, 5).unwrap();
    assert_eq!(a.samples, b.samples);
}
