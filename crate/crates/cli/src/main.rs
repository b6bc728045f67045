//! `prosody-vc` command-line front end: feature extraction, conversion,
//! toy training and modulation sweeps.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use prosody_vc::diffusion::Checkpoint;
use prosody_vc::encoders::DEFAULT_SPEAKER_DIM;
use prosody_vc::eval::{modulation_sweep, write_sweep_csv, SweepMode, SweepPair};
use prosody_vc::ftb;
use prosody_vc::pipeline::{
    convert, extract_features, load_corpus, load_pair_list, read_alignment, read_wav, train_toy,
    write_features, ConvertOptions, RunReport, TrainConfig, DEFAULT_LR,
};
use prosody_vc::signal::{save_wav, MelConfig};
use prosody_vc::transform::ModulationSpec;
use prosody_vc::vocoder::DEFAULT_GL_ITERS;
use prosody_vc::{Error, Result};

#[derive(Parser)]
#[command(name = "prosody-vc", version, about = "Prosody-controllable voice conversion at toy scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    F0,
    Rate,
}

#[derive(Subcommand)]
enum Command {
    /// Write mel, prosody, units, speaker embedding and (with an alignment)
    /// the average-mel prior as FTB files named `<out>.<kind>.ftb`.
    Extract {
        #[arg(long = "in")]
        input: PathBuf,
        /// Output prefix.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        alignment: Option<PathBuf>,
        /// Seed of the per-utterance unit codebook.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Convert the source utterance towards the target speaker's prosody.
    Convert {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        trg: PathBuf,
        #[arg(long = "src-align")]
        src_align: PathBuf,
        #[arg(long)]
        ckpt: PathBuf,
        /// Flat key=value modulation file; flags below take precedence.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        octave: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        semitones: Option<f64>,
        /// FTB vector of per-frame log-Hz offsets.
        #[arg(long = "f0-curve")]
        f0_curve: Option<PathBuf>,
        #[arg(long = "energy-gain", allow_hyphen_values = true)]
        energy_gain: Option<f64>,
        /// Conversion rate used instead of the measured one.
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long = "rate-control")]
        rate_control: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "gl-iters", default_value_t = DEFAULT_GL_ITERS)]
        gl_iters: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Train the toy decoder on `speaker_utt.wav` files (+ `.tsv` alignments).
    TrainToy {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LR)]
        lr: f64,
    },
    /// Run the modulation sweep over a pair list and write a CSV report.
    #[command(alias = "eval")]
    Sweep {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "f0")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    Ok(Checkpoint::load(path)?)
}

fn write_report(path: &Path, value: &RunReport) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::UnwritableFile {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract { input, out, alignment, seed } => {
            let wave = read_wav(&input)?;
            let align = alignment.as_deref().map(read_alignment).transpose()?;
            let features = extract_features(&wave, align.as_ref(), &MelConfig::default(), DEFAULT_SPEAKER_DIM, seed)?;
            for path in write_features(&features, &out)? {
                println!("{}", path.display());
            }
        }
        Command::Convert {
            src,
            trg,
            src_align,
            ckpt,
            spec,
            octave,
            semitones,
            f0_curve,
            energy_gain,
            rate,
            rate_control,
            seed,
            gl_iters,
            out,
            report,
        } => {
            let (mut modulation, mut curve_path) = match &spec {
                Some(p) => {
                    let (m, c) = ModulationSpec::load(p)?;
                    let base = p.parent().unwrap_or(Path::new(""));
                    (m, c.map(|c| base.join(c)))
                }
                None => (ModulationSpec::default(), None),
            };
            if let Some(v) = octave {
                modulation.octave_shift = v;
            }
            if let Some(v) = semitones {
                modulation.semitone_shift = v;
            }
            if let Some(v) = energy_gain {
                modulation.energy_gain = v;
            }
            if let Some(v) = rate {
                modulation.rate_multiplier = Some(v);
            }
            if f0_curve.is_some() {
                curve_path = f0_curve;
            }
            if let Some(p) = curve_path {
                modulation.frame_f0_delta = Some(ftb::read_vector(&p)?);
            }
            let ckpt = load_checkpoint(&ckpt)?;
            let src_wave = read_wav(&src)?;
            let trg_wave = read_wav(&trg)?;
            let align = read_alignment(&src_align)?;
            let opts = ConvertOptions { spec: modulation, rate_control, seed, gl_iters };
            let mut result = convert(&ckpt, &src_wave, &trg_wave, &align, &opts)?;
            save_wav(&result.wave, &out)?;
            result.report.source = src.display().to_string();
            result.report.target = trg.display().to_string();
            write_report(&report, &result.report)?;
        }
        Command::TrainToy { corpus, epochs, seed, ckpt, lr } => {
            let items = load_corpus(&corpus)?;
            let cfg = TrainConfig { epochs, seed, lr, ..TrainConfig::default() };
            let outcome = train_toy(&items, &cfg, |log| {
                println!("epoch {} loss {:.6}", log.epoch, log.train_loss);
            })?;
            println!(
                "probe loss {:.6} -> {:.6}",
                outcome.initial_probe_loss, outcome.final_probe_loss
            );
            outcome.checkpoint.save(&ckpt)?;
        }
        Command::Sweep { pairs, ckpt, out, mode, seed } => {
            let list = load_pair_list(&pairs)?;
            let ckpt = load_checkpoint(&ckpt)?;
            let pairs = list
                .iter()
                .map(|p| {
                    Ok(SweepPair {
                        src: read_wav(&p.src)?,
                        trg: read_wav(&p.trg)?,
                        src_align: read_alignment(&p.src_align)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let mode = match mode {
                Mode::F0 => SweepMode::F0,
                Mode::Rate => SweepMode::Rate,
            };
            let rows = modulation_sweep(&ckpt, &pairs, mode, &mode.default_levels(), seed)?;
            write_sweep_csv(&out, &rows)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
