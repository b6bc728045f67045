use proptest::prelude::*;
use prosody_vc::prosody::ProsodyTrack;
use prosody_vc::transform::*;

fn track_strategy() -> impl Strategy<Value = ProsodyTrack> {
    prop::collection::vec((any::<bool>(), 60.0f64..400.0, -20.0f64..5.0), 1..120).prop_filter_map(
        "needs a voiced frame",
        |frames| {
            if !frames.iter().any(|f| f.0) {
                return None;
            }
            let f0: Vec<f64> = frames.iter().map(|&(v, f, _)| if v { f } else { 0.0 }).collect();
            let energy = frames.iter().map(|f| f.2).collect();
            ProsodyTrack::from_f0_hz(&f0, energy).ok()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn mean_transfer_hits_target(track in track_strategy(), mu in 80.0f64..320.0) {
        let mu_src = voiced_mean(&track).unwrap();
        let min_voiced = track.f0_hz().iter().zip(track.voiced()).filter(|(_, &v)| v).map(|(f, _)| *f).fold(f64::INFINITY, f64::min);
        match f0_mean_transfer(&track, mu) {
            Ok(out) => {
                prop_assert!((voiced_mean(&out).unwrap() - mu).abs() < 1e-9);
                prop_assert_eq!(out.voiced(), track.voiced());
                prop_assert_eq!(out.log_energy(), track.log_energy());
            }
            Err(TransformError::NonPositiveF0 { .. }) => prop_assert!(min_voiced + mu - mu_src <= 0.0),
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }

    #[test]
    fn mean_transfer_fixed_point(track in track_strategy()) {
        let out = f0_mean_transfer(&track, voiced_mean(&track).unwrap()).unwrap();
        for (a, b) in out.f0_hz().iter().zip(track.f0_hz()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn clamp_stays_in_range(raw in 0.1f64..5.0) {
        let r = ConversionRate::new(raw);
        prop_assert!((RATE_MIN..=RATE_MAX).contains(&r.clamped));
        if (RATE_MIN..=RATE_MAX).contains(&raw) {
            prop_assert_eq!(r.clamped, raw);
        }
        prop_assert_eq!(clamp_rate(r.clamped), r.clamped);
    }

    #[test]
    fn octave_round_trip_and_mask(track in track_strategy(), x in -2.0f64..2.0, semis in -12.0f64..12.0, gain in -3.0f64..3.0) {
        let up = modulate(&track, &ModulationSpec { octave_shift: x, semitone_shift: semis, energy_gain: gain, ..ModulationSpec::default() }).unwrap();
        let back = modulate(&up, &ModulationSpec { octave_shift: -x, semitone_shift: -semis, energy_gain: -gain, ..ModulationSpec::default() }).unwrap();
        prop_assert_eq!(up.voiced(), track.voiced());
        prop_assert_eq!(up.n_frames(), track.n_frames());
        for (a, b) in back.log_f0().iter().zip(track.log_f0()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let factor = 2f64.powf(x + semis / 12.0);
        for ((u, t), v) in up.f0_hz().iter().zip(track.f0_hz()).zip(track.voiced()) {
            if *v {
                prop_assert!((u / t - factor).abs() < 1e-9 * factor);
            } else {
                prop_assert_eq!(*u, 0.0);
            }
        }
    }

    #[test]
    fn curve_length_checked(track in track_strategy(), extra in 1usize..4) {
        let spec = ModulationSpec { frame_f0_delta: Some(vec![0.1; track.n_frames() + extra]), ..ModulationSpec::default() };
        let mismatch = matches!(modulate(&track, &spec), Err(TransformError::CurveLengthMismatch { .. }));
        prop_assert!(mismatch);
    }
}

#[test]
fn three_semitones_and_quarter_octave() {
    let track = ProsodyTrack::from_f0_hz(&[100.0, 0.0, 200.0], vec![0.0; 3]).unwrap();
    let up = modulate(&track, &ModulationSpec { semitone_shift: 3.0, ..ModulationSpec::default() }).unwrap();
    let f = up.f0_hz();
    assert!((f[0] / 100.0 - 1.189_207).abs() < 1e-6);
    assert_eq!(f[1], 0.0);
    let q = modulate(&track, &ModulationSpec::octaves(0.25)).unwrap();
    assert!((q.f0_hz()[2] / 200.0 - 2f64.powf(0.25)).abs() < 1e-12);
}
