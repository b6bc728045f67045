use std::path::PathBuf;

use thiserror::Error;

use crate::conditioning::CondError;
use crate::diffusion::DiffusionError;
use crate::encoders::EncoderError;
use crate::eval::EvalError;
use crate::ftb::FtbError;
use crate::prosody::ProsodyError;
use crate::rate::RateError;
use crate::signal::SignalError;
use crate::transform::TransformError;
use crate::vocoder::VocoderError;

/// Any failure surfaced by the end-to-end pipeline. Messages start with the
/// name of the underlying variant.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Prosody(#[from] ProsodyError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Cond(#[from] CondError),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Vocoder(#[from] VocoderError),
    #[error(transparent)]
    Ftb(#[from] FtbError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("InsufficientData: {0}")]
    InsufficientData(String),
    #[error("EmptyPairList: {0}")]
    EmptyPairList(String),
    #[error("InvalidInput: {0}")]
    InvalidInput(String),
    #[error("UnreadableFile: {path}: {reason}")]
    UnreadableFile { path: PathBuf, reason: String },
    #[error("UnwritableFile: {path}: {reason}")]
    UnwritableFile { path: PathBuf, reason: String },
    #[error("MissingCodebook: checkpoint has no unit codebook for rate estimation")]
    MissingCodebook,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Exit code for input and file problems.
pub const EXIT_INPUT: i32 = 2;

fn signal_code(e: &SignalError) -> i32 {
    match e {
        SignalError::UnreadableFile { .. }
        | SignalError::UnwritableFile { .. }
        | SignalError::UnsupportedFormat(_) => EXIT_INPUT,
        _ => 3,
    }
}

impl Error {
    /// Process exit code: 2 for unreadable, unwritable or malformed inputs,
    /// and one code per module otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Signal(e) => signal_code(e),
            Error::Prosody(ProsodyError::Signal(e)) => signal_code(e),
            Error::Prosody(_) => 4,
            Error::Transform(TransformError::Prosody(ProsodyError::Signal(e))) => signal_code(e),
            Error::Transform(_) => 5,
            Error::Encoder(EncoderError::UnreadableFile { .. })
            | Error::Encoder(EncoderError::ParseError { .. }) => EXIT_INPUT,
            Error::Encoder(_) => 6,
            Error::Cond(_) => 7,
            Error::Diffusion(DiffusionError::UnreadableFile { .. })
            | Error::Diffusion(DiffusionError::UnwritableFile { .. })
            | Error::Diffusion(DiffusionError::BadCheckpoint(_)) => EXIT_INPUT,
            Error::Diffusion(_) => 8,
            Error::Rate(_) => 9,
            Error::Vocoder(_) => 10,
            Error::Ftb(_) => EXIT_INPUT,
            Error::Eval(_) => 11,
            Error::InsufficientData(_) => 12,
            Error::EmptyPairList(_)
            | Error::InvalidInput(_)
            | Error::UnreadableFile { .. }
            | Error::UnwritableFile { .. } => EXIT_INPUT,
            Error::MissingCodebook => 8,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn messages_lead_with_variant() {
        let e = Error::from(SignalError::UnreadableFile {
            path: "x.wav".into(),
            reason: "gone".into(),
        });
        assert!(e.to_string().starts_with("UnreadableFile"));
        assert_eq!(e.exit_code(), 2);
        let e = Error::EmptyPairList("pairs.tsv".into());
        assert_eq!(e.exit_code(), 2);
        assert_eq!(Error::from(RateError::TooShort(1)).exit_code(), 9);
    }
}
