//! End-to-end orchestration: feature extraction, prosody-controlled
//! conversion, toy training over a small corpus, and input-list loading.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conditioning::ModelDims;
use crate::diffusion::{
    decoder_denoiser, draw_noise, example_loss, reverse_sample, train_step, train_step_with, Checkpoint, DecoderParams,
    MelNorm, NoiseDraw, NoiseSchedule, TrainExample,
};
use crate::encoders::{average_mel_target, load_alignment, speaker_embedding, Alignment, SpeakerEmbedding};
use crate::error::{Error, Result};
use crate::ftb;
use crate::matrix::Matrix;
use crate::prosody::{
    extract_prosody, train_codebook, unitize, Codebook, ProsodyConfig, ProsodyTrack, UnitSequence,
    DEFAULT_CODEBOOK_SIZE,
};
use crate::rate::resample_mel;
use crate::signal::{load_wav, mel_spectrogram, MelConfig, MelSpectrogram, SignalError, Waveform};
use crate::transform::{conversion_rate, f0_mean_transfer, modulate, voiced_mean, ConversionRate, ModulationSpec};
use crate::vocoder::{griffin_lim, mel_to_linear, DEFAULT_GL_ITERS};

/// Mel spectrogram and prosody track of one waveform, sharing one framing.
pub fn analyze(wave: &Waveform, mel_cfg: &MelConfig) -> Result<(MelSpectrogram, ProsodyTrack)> {
    if wave.sample_rate != mel_cfg.sample_rate {
        return Err(SignalError::ConfigMismatch(format!(
            "waveform at {} Hz, model expects {} Hz",
            wave.sample_rate, mel_cfg.sample_rate
        ))
        .into());
    }
    let mel = mel_spectrogram(wave, mel_cfg)?;
    let prosody = extract_prosody(wave, &ProsodyConfig::from_mel(mel_cfg))?;
    Ok((mel, prosody))
}

fn distinct_rows(m: &Matrix) -> usize {
    m.iter_rows()
        .map(|r| r.iter().map(|v| v.to_bits()).collect::<Vec<_>>())
        .collect::<HashSet<_>>()
        .len()
}

/// Codebook with `min(k, distinct frames)` centroids, or `None` when the
/// frames hold fewer than two distinct vectors.
fn fit_codebook(frames: &Matrix, k: usize, seed: u64) -> Result<Option<Codebook>> {
    let k = k.min(distinct_rows(frames));
    if k < 2 {
        return Ok(None);
    }
    Ok(Some(train_codebook(frames, k, seed)?))
}

/// Everything `extract` writes for one utterance.
#[derive(Clone, Debug)]
pub struct Features {
    pub mel: MelSpectrogram,
    pub prosody: ProsodyTrack,
    pub units: UnitSequence,
    pub speaker: SpeakerEmbedding,
    pub prior: Option<MelSpectrogram>,
}

/// Analyses one utterance. Units come from a codebook fitted to the
/// utterance itself; a single unit covers frames that are all identical.
pub fn extract_features(
    wave: &Waveform,
    alignment: Option<&Alignment>,
    mel_cfg: &MelConfig,
    speaker_dim: usize,
    seed: u64,
) -> Result<Features> {
    let (mel, prosody) = analyze(wave, mel_cfg)?;
    let units = match fit_codebook(&mel.values, DEFAULT_CODEBOOK_SIZE, seed)? {
        Some(cb) => unitize(&mel, &cb)?,
        None => UnitSequence::from_labels(&vec![0; mel.n_frames()]),
    };
    let speaker = speaker_embedding(&mel, speaker_dim)?;
    let prior = alignment
        .map(|a| average_mel_target(&mel, a))
        .transpose()?;
    Ok(Features {
        mel,
        prosody,
        units,
        speaker,
        prior,
    })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `<prefix>.mel.ftb`, `.prosody.ftb`, `.units.ftb` (runs as
/// `label, duration` rows), `.spk.ftb` and, with an alignment,
/// `.prior.ftb`. Returns the written paths.
pub fn write_features(features: &Features, prefix: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mel_path = with_suffix(prefix, ".mel.ftb");
    ftb::write_matrix(&mel_path, &features.mel.values)?;
    written.push(mel_path);
    let prosody_path = with_suffix(prefix, ".prosody.ftb");
    ftb::write_prosody(&prosody_path, &features.prosody)?;
    written.push(prosody_path);
    let pairs = features.units.pairs();
    let units = Matrix::from_fn(pairs.len(), 2, |r, c| {
        if c == 0 {
            pairs[r].0 as f64
        } else {
            pairs[r].1 as f64
        }
    });
    let units_path = with_suffix(prefix, ".units.ftb");
    ftb::write_matrix(&units_path, &units)?;
    written.push(units_path);
    let spk_path = with_suffix(prefix, ".spk.ftb");
    ftb::write_vector(&spk_path, features.speaker.values())?;
    written.push(spk_path);
    if let Some(prior) = &features.prior {
        let prior_path = with_suffix(prefix, ".prior.ftb");
        ftb::write_matrix(&prior_path, &prior.values)?;
        written.push(prior_path);
    }
    Ok(written)
}

#[derive(Clone, Debug)]
pub struct ConvertOptions {
    pub spec: ModulationSpec,
    pub rate_control: bool,
    pub seed: u64,
    pub gl_iters: usize,
}

impl Default for ConvertOptions {
    fn default() -> Self {
        Self {
            spec: ModulationSpec::default(),
            rate_control: false,
            seed: 0,
            gl_iters: DEFAULT_GL_ITERS,
        }
    }
}

/// Flat record of one conversion run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub source: String,
    pub target: String,
    pub seed: u64,
    pub mu_src: f64,
    pub mu_trg: f64,
    pub transferred_mean_hz: f64,
    pub requested_mean_hz: f64,
    pub rc_raw: f64,
    pub rc_clamped: f64,
    pub rate_override: Option<f64>,
    pub rate_control: bool,
    pub applied_rate: f64,
    pub octave_shift: f64,
    pub semitone_shift: f64,
    pub energy_gain: f64,
    pub f0_curve: bool,
    pub in_frames: usize,
    pub out_frames: usize,
    pub out_samples: usize,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug)]
pub struct Conversion {
    pub wave: Waveform,
    /// Generated mel after optional rate control.
    pub mel: MelSpectrogram,
    pub source_prosody: ProsodyTrack,
    /// Source prosody after the global mean transfer.
    pub transferred: ProsodyTrack,
    /// Prosody fed to the conditioning module.
    pub conditioning: ProsodyTrack,
    pub rate: ConversionRate,
    pub report: RunReport,
}

fn measure_rate(
    ckpt: &Checkpoint,
    src_mel: &MelSpectrogram,
    trg_mel: &MelSpectrogram,
    spec: &ModulationSpec,
) -> Result<ConversionRate> {
    if let Some(r) = spec.rate_multiplier {
        return Ok(ConversionRate::new(r));
    }
    let cb = ckpt.codebook.as_ref().ok_or(Error::MissingCodebook)?;
    Ok(conversion_rate(&unitize(src_mel, cb)?, &unitize(trg_mel, cb)?)?)
}

/// Generates a log-mel spectrogram for the given prior and conditioning.
pub fn generate_mel(
    ckpt: &Checkpoint,
    prior: &MelSpectrogram,
    conditioning: &ProsodyTrack,
    speaker: &SpeakerEmbedding,
    rng: &mut ChaCha8Rng,
) -> Result<MelSpectrogram> {
    let prior_n = ckpt.norm.normalize(&prior.values);
    let denoise = decoder_denoiser(&ckpt.params, conditioning, speaker);
    let sample = reverse_sample(&prior_n, denoise, &ckpt.schedule, Some(rng))?;
    Ok(MelSpectrogram::from_log_values(ckpt.norm.denormalize(&sample), prior.config)?)
}

/// Source to target conversion: mean F0 transfer, conversion rate, user
/// modulation, conditioning, reverse diffusion from the source's
/// average-mel prior, optional rate control and Griffin-Lim synthesis.
pub fn convert(
    ckpt: &Checkpoint,
    src: &Waveform,
    trg: &Waveform,
    src_align: &Alignment,
    opts: &ConvertOptions,
) -> Result<Conversion> {
    let started = Instant::now();
    opts.spec.validate()?;
    let mel_cfg = &ckpt.mel;
    let (src_mel, src_prosody) = analyze(src, mel_cfg)?;
    let (trg_mel, trg_prosody) = analyze(trg, mel_cfg)?;
    let mu_src = voiced_mean(&src_prosody)?;
    let mu_trg = voiced_mean(&trg_prosody)?;
    let transferred = f0_mean_transfer(&src_prosody, mu_trg)?;
    let rate = measure_rate(ckpt, &src_mel, &trg_mel, &opts.spec)?;
    let conditioning = modulate(&transferred, &opts.spec)?;

    let prior = average_mel_target(&src_mel, src_align)?;
    let speaker = speaker_embedding(&trg_mel, ckpt.params.dims.speaker_dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let generated = generate_mel(ckpt, &prior, &conditioning, &speaker, &mut rng)?;
    let mel = if opts.rate_control {
        resample_mel(&generated, &rate)?
    } else {
        generated
    };
    let wave = griffin_lim(&mel_to_linear(&mel)?, &mel.config, opts.gl_iters, opts.seed)?;

    let report = RunReport {
        source: String::new(),
        target: String::new(),
        seed: opts.seed,
        mu_src,
        mu_trg,
        transferred_mean_hz: voiced_mean(&transferred)?,
        requested_mean_hz: voiced_mean(&conditioning)?,
        rc_raw: rate.raw,
        rc_clamped: rate.clamped,
        rate_override: opts.spec.rate_multiplier,
        rate_control: opts.rate_control,
        applied_rate: if opts.rate_control { rate.clamped } else { 1.0 },
        octave_shift: opts.spec.octave_shift,
        semitone_shift: opts.spec.semitone_shift,
        energy_gain: opts.spec.energy_gain,
        f0_curve: opts.spec.frame_f0_delta.is_some(),
        in_frames: src_mel.n_frames(),
        out_frames: mel.n_frames(),
        out_samples: wave.len(),
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    Ok(Conversion {
        wave,
        mel,
        source_prosody: src_prosody,
        transferred,
        conditioning,
        rate,
        report,
    })
}

pub fn read_wav(path: &Path) -> Result<Waveform> {
    Ok(load_wav(path)?)
}

pub fn read_alignment(path: &Path) -> Result<Alignment> {
    Ok(load_alignment(path)?)
}

/// One training utterance named `speakerID_uttID.wav`, with an optional
/// alignment in `speakerID_uttID.tsv`.
#[derive(Clone, Debug)]
pub struct CorpusItem {
    pub speaker: String,
    pub name: String,
    pub wave: Waveform,
    pub alignment: Option<Alignment>,
}

/// Loads every `*.wav` in `dir` (sorted by file name). The speaker is the
/// file-name prefix before the first underscore.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusItem>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::UnreadableFile {
        path: dir.to_path_buf(),
        reason: e.to_string(),
    })?;
    let mut wavs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    wavs.sort();
    wavs.into_iter()
        .map(|path| {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::InvalidInput(format!("bad file name {}", path.display())))?
                .to_string();
            let (speaker, _) = stem.split_once('_').ok_or_else(|| {
                Error::InvalidInput(format!(
                    "{}: expected speakerID_uttID.wav",
                    path.display()
                ))
            })?;
            let tsv = path.with_extension("tsv");
            let alignment = if tsv.exists() {
                Some(load_alignment(&tsv)?)
            } else {
                None
            };
            Ok(CorpusItem {
                speaker: speaker.to_string(),
                name: stem.clone(),
                wave: load_wav(&path)?,
                alignment,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub epochs: usize,
    pub seed: u64,
    pub lr: f64,
    pub dims: ModelDims,
    pub schedule: NoiseSchedule,
    pub mel: MelConfig,
    pub codebook_size: usize,
    /// Standard deviation of the normalised mel values.
    pub data_std: f64,
    /// Fixed `(t, eps)` draws per utterance used to compare the loss
    /// before and after training.
    pub probe_draws: usize,
}

pub const DEFAULT_LR: f64 = 0.5;

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            seed: 0,
            lr: DEFAULT_LR,
            dims: ModelDims::default(),
            schedule: NoiseSchedule::default(),
            mel: MelConfig::default(),
            codebook_size: DEFAULT_CODEBOOK_SIZE,
            data_std: 1.0,
            probe_draws: 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean loss of this epoch's training steps.
    pub train_loss: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    /// Loss on the fixed probe draws before the first step.
    pub initial_probe_loss: f64,
    /// Loss on the same draws after the last step.
    pub final_probe_loss: f64,
    pub epochs: Vec<EpochLog>,
}

/// Prior for an unaligned utterance: its mean frame everywhere.
pub fn utterance_prior(mel: &Matrix) -> Matrix {
    let t = mel.rows() as f64;
    let mut mean = vec![0.0; mel.cols()];
    for row in mel.iter_rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v / t;
        }
    }
    Matrix::from_fn(mel.rows(), mel.cols(), |_, c| mean[c])
}

const PROBE_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

fn probe_loss(
    examples: &[TrainExample],
    probes: &[Vec<NoiseDraw>],
    params: &DecoderParams,
    sched: &NoiseSchedule,
) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0;
    for (ex, draws) in examples.iter().zip(probes) {
        for d in draws {
            total += example_loss(ex, params, sched, d)?;
            count += 1;
        }
    }
    Ok(total / count.max(1) as f64)
}

/// Result of repeatedly fitting one utterance under one fixed noise draw.
#[derive(Clone, Debug)]
pub struct OverfitOutcome {
    pub initial_loss: f64,
    pub final_loss: f64,
    /// Loss before each step.
    pub losses: Vec<f64>,
    pub params: DecoderParams,
}

/// Single-sample overfit: `steps` gradient steps on one utterance with a
/// single `(t, eps)` draw fixed by the seed, conditioned on its own speaker
/// embedding.
pub fn overfit_single(item: &CorpusItem, cfg: &TrainConfig, steps: usize) -> Result<OverfitOutcome> {
    let (mel, track) = analyze(&item.wave, &cfg.mel)?;
    let prior = match &item.alignment {
        Some(a) => average_mel_target(&mel, a)?.values,
        None => utterance_prior(&mel.values),
    };
    let norm = MelNorm::fit([&mel.values], cfg.data_std)?;
    let example = TrainExample {
        x0: norm.normalize(&mel.values),
        prior: norm.normalize(&prior),
        prosody: track,
        speaker: speaker_embedding(&mel, cfg.dims.speaker_dim)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = DecoderParams::random(cfg.dims, &mut rng);
    let draw = draw_noise(example.x0.shape(), &cfg.schedule, &mut rng);
    let batch = std::slice::from_ref(&example);
    let draws = std::slice::from_ref(&draw);
    let mut losses = Vec::with_capacity(steps);
    for _ in 0..steps {
        let (next, loss) = train_step_with(batch, draws, &params, &cfg.schedule, cfg.lr)?;
        losses.push(loss);
        params = next;
    }
    let initial_loss = match losses.first() {
        Some(&l) => l,
        None => example_loss(&example, &params, &cfg.schedule, &draw)?,
    };
    let final_loss = example_loss(&example, &params, &cfg.schedule, &draw)?;
    Ok(OverfitOutcome {
        initial_loss,
        final_loss,
        losses,
        params,
    })
}

/// Deterministic toy training: one gradient step per utterance per epoch,
/// each paired with the embedding of a random utterance by the same
/// speaker. `on_epoch` sees every epoch's losses as they are produced.
pub fn train_toy(
    items: &[CorpusItem],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainOutcome> {
    if items.is_empty() {
        return Err(Error::InsufficientData("corpus has no utterances".into()));
    }
    if cfg.dims.n_mels != cfg.mel.n_mels {
        return Err(Error::InvalidInput(format!(
            "model expects {} bands, mel config has {}",
            cfg.dims.n_mels, cfg.mel.n_mels
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut mels = Vec::with_capacity(items.len());
    let mut tracks = Vec::with_capacity(items.len());
    let mut priors = Vec::with_capacity(items.len());
    let mut embeddings = Vec::with_capacity(items.len());
    for item in items {
        let (mel, track) = analyze(&item.wave, &cfg.mel)?;
        let prior = match &item.alignment {
            Some(a) => average_mel_target(&mel, a)?.values,
            None => utterance_prior(&mel.values),
        };
        embeddings.push(speaker_embedding(&mel, cfg.dims.speaker_dim)?);
        priors.push(prior);
        tracks.push(track);
        mels.push(mel);
    }
    let norm = MelNorm::fit(mels.iter().map(|m| &m.values), cfg.data_std)?;
    let all_frames = Matrix::from_vec(
        mels.iter().map(|m| m.n_frames()).sum(),
        cfg.mel.n_mels,
        mels.iter().flat_map(|m| m.values.as_slice().iter().copied()).collect(),
    );
    let codebook = fit_codebook(&all_frames, cfg.codebook_size, cfg.seed)?;

    let mut by_speaker: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        by_speaker.entry(item.speaker.as_str()).or_default().push(i);
    }
    let partners: Vec<Vec<usize>> = items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let same = &by_speaker[item.speaker.as_str()];
            let others: Vec<usize> = same.iter().copied().filter(|&j| j != i).collect();
            if others.is_empty() {
                vec![i]
            } else {
                others
            }
        })
        .collect();

    let mut examples: Vec<TrainExample> = (0..items.len())
        .map(|i| TrainExample {
            x0: norm.normalize(&mels[i].values),
            prior: norm.normalize(&priors[i]),
            prosody: tracks[i].clone(),
            speaker: embeddings[partners[i][0]].clone(),
        })
        .collect();

    let mut params = DecoderParams::random(cfg.dims, &mut rng);
    let mut probe_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ PROBE_SEED_SALT);
    let probes: Vec<Vec<NoiseDraw>> = examples
        .iter()
        .map(|ex| {
            (0..cfg.probe_draws)
                .map(|_| draw_noise(ex.x0.shape(), &cfg.schedule, &mut probe_rng))
                .collect()
        })
        .collect();
    let probe_examples = examples.clone();
    let initial_probe_loss = probe_loss(&probe_examples, &probes, &params, &cfg.schedule)?;

    let mut logs = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut total = 0.0;
        for (i, example) in examples.iter_mut().enumerate() {
            let pick = partners[i][rng.random_range(0..partners[i].len())];
            example.speaker = embeddings[pick].clone();
            let (next, loss) = train_step(std::slice::from_ref(example), &params, &cfg.schedule, cfg.lr, &mut rng)?;
            params = next;
            total += loss;
        }
        let log = EpochLog {
            epoch: epoch + 1,
            train_loss: total / examples.len() as f64,
        };
        on_epoch(&log);
        logs.push(log);
    }
    let final_probe_loss = probe_loss(&probe_examples, &probes, &params, &cfg.schedule)?;
    Ok(TrainOutcome {
        final_probe_loss,
        checkpoint: Checkpoint {
            mel: cfg.mel,
            schedule: cfg.schedule,
            params,
            norm,
            codebook,
        },
        initial_probe_loss,
        epochs: logs,
    })
}

/// One line of a pair list: source, target and source alignment.
#[derive(Clone, Debug, PartialEq)]
pub struct PairPaths {
    pub src: PathBuf,
    pub trg: PathBuf,
    pub src_align: PathBuf,
}

/// Reads a tab-separated `src  trg  src_align` list. Relative paths are
/// resolved against the list's directory; `#` lines are comments.
pub fn load_pair_list(path: &Path) -> Result<Vec<PairPaths>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::UnreadableFile {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(Error::InvalidInput(format!(
                "{}:{}: expected 3 tab-separated columns, got {}",
                path.display(),
                lineno + 1,
                cols.len()
            )));
        }
        let resolve = |p: &str| base.join(p);
        pairs.push(PairPaths {
            src: resolve(cols[0]),
            trg: resolve(cols[1]),
            src_align: resolve(cols[2]),
        });
    }
    if pairs.is_empty() {
        return Err(Error::EmptyPairList(path.display().to_string()));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes_append() {
        assert_eq!(
            with_suffix(Path::new("out/utt"), ".mel.ftb"),
            PathBuf::from("out/utt.mel.ftb")
        );
    }

    #[test]
    fn distinct_and_codebook() {
        let flat = Matrix::filled(10, 3, -1.0);
        assert_eq!(distinct_rows(&flat), 1);
        assert!(fit_codebook(&flat, 100, 1).unwrap().is_none());
        let two = Matrix::from_fn(10, 3, |r, _| (r % 2) as f64);
        assert_eq!(fit_codebook(&two, 100, 1).unwrap().unwrap().size(), 2);
    }

    #[test]
    fn empty_inputs() {
        let cfg = TrainConfig::default();
        assert!(matches!(
            train_toy(&[], &cfg, |_| {}),
            Err(Error::InsufficientData(_))
        ));
        let dir = tempfile::tempdir().unwrap();
        let list = dir.path().join("pairs.tsv");
        std::fs::write(&list, "# nothing\n\n").unwrap();
        let err = load_pair_list(&list).unwrap_err();
        assert!(matches!(err, Error::EmptyPairList(_)));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn pair_list_resolves_relative() {
        let dir = tempfile::tempdir().unwrap();
        let list = dir.path().join("pairs.tsv");
        std::fs::write(&list, "a.wav\tb.wav\ta.tsv\n").unwrap();
        let pairs = load_pair_list(&list).unwrap();
        assert_eq!(pairs[0].src, dir.path().join("a.wav"));
        assert_eq!(pairs[0].src_align, dir.path().join("a.tsv"));
    }
}
