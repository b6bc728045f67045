use std::process::Command;

use prosody_vc::signal::{save_wav, Waveform};

const BIN: &str = env!("CARGO_BIN_EXE_prosody-vc");

fn run(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().unwrap()
}

#[test]
fn missing_input_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.wav");
    let out = run(&["extract", "--in", missing.to_str().unwrap(), "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn empty_corpus_is_insufficient_data() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("m.ckpt");
    let out = run(&["train-toy", "--corpus", dir.path().to_str().unwrap(), "--ckpt", ckpt.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(12));
    assert!(!ckpt.exists());
}

#[test]
fn extract_prints_written_paths() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("quiet.wav");
    save_wav(&Waveform::new(vec![0.0; 22050], 22050), &wav).unwrap();
    let out = run(&["extract", "--in", wav.to_str().unwrap(), "--out", dir.path().join("q").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let paths: Vec<&str> = stdout.lines().collect();
    assert!(paths.len() >= 4, "{paths:?}");
    assert!(paths.iter().all(|p| std::path::Path::new(p).exists()));
}

#[test]
fn unknown_sweep_mode_is_rejected() {
    let out = run(&["sweep", "--pairs", "p", "--ckpt", "c", "--out", "o", "--mode", "tempo"]);
    assert_eq!(out.status.code(), Some(2));
}
