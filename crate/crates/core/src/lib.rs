//! Prosody-controllable voice conversion at desk scale.
//!
//! The crate extracts F0, energy and discrete-unit speaking rate from
//! speech, transfers the target speaker's mean F0 onto the source, applies
//! user prosody edits, and generates a mel spectrogram with a small
//! conditional diffusion decoder starting from the source's average-mel
//! prior. Rate control re-times the mel and a Griffin-Lim vocoder renders
//! audio.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod conditioning;
pub mod diffusion;
pub mod encoders;
pub mod error;
pub mod eval;
pub mod ftb;
pub mod matrix;
pub mod nn;
pub mod pipeline;
pub mod prosody;
pub mod rate;
pub mod signal;
pub mod transform;
pub mod vocoder;

pub use error::{Error, Result};
pub use matrix::Matrix;
