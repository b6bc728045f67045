//! PFCK checkpoint: `"PFCK"`, version `u32`, then named blocks until EOF.
//! Each block is `name_len u16`, name bytes, `rank u8`, `rank` dims as
//! `u32`, and `f32` little-endian row-major data.

use std::collections::HashMap;
use std::path::Path;

use super::decoder::DecoderParams;
use super::schedule::NoiseSchedule;
use super::{DiffusionError, MelNorm};
use crate::conditioning::ModelDims;
use crate::matrix::Matrix;
use crate::prosody::Codebook;
use crate::signal::MelConfig;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"PFCK";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything inference needs: analysis settings, schedule, weights, the
/// mel normalisation and the unit codebook used for rate statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub mel: MelConfig,
    pub schedule: NoiseSchedule,
    pub params: DecoderParams,
    pub norm: MelNorm,
    pub codebook: Option<Codebook>,
}

struct Block {
    dims: Vec<usize>,
    data: Vec<f32>,
}

fn bad(msg: impl Into<String>) -> DiffusionError {
    DiffusionError::BadCheckpoint(msg.into())
}

fn push_block(out: &mut Vec<u8>, name: &str, dims: &[usize], data: impl IntoIterator<Item = f64>) {
    out.extend((name.len() as u16).to_le_bytes());
    out.extend(name.as_bytes());
    out.push(dims.len() as u8);
    for &d in dims {
        out.extend((d as u32).to_le_bytes());
    }
    let mut count = 0;
    for v in data {
        out.extend((v as f32).to_le_bytes());
        count += 1;
    }
    debug_assert_eq!(count, dims.iter().product::<usize>());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DiffusionError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| bad(format!("truncated at byte {}", self.pos)))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, DiffusionError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

fn parse_blocks(bytes: &[u8]) -> Result<HashMap<String, Block>, DiffusionError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != CHECKPOINT_MAGIC {
        return Err(bad("missing PFCK magic"));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let mut blocks = HashMap::new();
    while r.pos < bytes.len() {
        let name_len = u16::from_le_bytes(r.take(2)?.try_into().expect("2 bytes")) as usize;
        let name = std::str::from_utf8(r.take(name_len)?)
            .map_err(|_| bad("block name is not UTF-8"))?
            .to_string();
        let rank = r.take(1)?[0] as usize;
        let dims = (0..rank)
            .map(|_| r.u32().map(|d| d as usize))
            .collect::<Result<Vec<_>, _>>()?;
        let n: usize = dims.iter().product();
        let raw = r.take(n.checked_mul(4).ok_or_else(|| bad("block too large"))?)?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        if blocks.insert(name.clone(), Block { dims, data }).is_some() {
            return Err(bad(format!("duplicate block {name}")));
        }
    }
    Ok(blocks)
}

fn get<'b>(blocks: &'b HashMap<String, Block>, name: &str, len: usize) -> Result<&'b Block, DiffusionError> {
    let block = blocks
        .get(name)
        .ok_or_else(|| bad(format!("missing block {name}")))?;
    if block.data.len() != len {
        return Err(bad(format!(
            "block {name} has {} values, expected {len}",
            block.data.len()
        )));
    }
    Ok(block)
}

fn as_usize(v: f32, what: &str) -> Result<usize, DiffusionError> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(bad(format!("{what} must be a non-negative integer, got {v}")))
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend(CHECKPOINT_MAGIC);
        out.extend(CHECKPOINT_VERSION.to_le_bytes());
        let m = &self.mel;
        // The log floor is stored as its base-10 exponent so the usual
        // 1e-10 survives the f32 round trip exactly.
        let mel = [
            f64::from(m.sample_rate),
            m.fft_size as f64,
            m.hop as f64,
            m.window as f64,
            m.n_mels as f64,
            m.fmin,
            m.fmax,
            m.log_floor.log10(),
        ];
        push_block(&mut out, "config.mel", &[mel.len()], mel);
        let d = &self.params.dims;
        let dims = [
            d.n_mels,
            d.speaker_dim,
            d.t_embed_dim,
            d.style_dim,
            d.merge_hidden,
            d.decoder_hidden,
            d.kernel,
        ]
        .map(|v| v as f64);
        push_block(&mut out, "config.dims", &[dims.len()], dims);
        let s = &self.schedule;
        push_block(
            &mut out,
            "config.schedule",
            &[3],
            [s.n_steps as f64, s.beta_min, s.beta_max],
        );
        for (name, dims, data) in self.params.blocks() {
            push_block(&mut out, name, &dims, data.iter().copied());
        }
        push_block(&mut out, "norm.mean", &[self.norm.mean.len()], self.norm.mean.iter().copied());
        push_block(&mut out, "norm.scale", &[1], [self.norm.scale]);
        if let Some(cb) = &self.codebook {
            let c = cb.centroids();
            push_block(&mut out, "units.codebook", &[c.rows(), c.cols()], c.as_slice().iter().copied());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DiffusionError> {
        let blocks = parse_blocks(bytes)?;
        let mel = &get(&blocks, "config.mel", 8)?.data;
        let mel = MelConfig {
            sample_rate: as_usize(mel[0], "sample_rate")? as u32,
            fft_size: as_usize(mel[1], "fft_size")?,
            hop: as_usize(mel[2], "hop")?,
            window: as_usize(mel[3], "window")?,
            n_mels: as_usize(mel[4], "n_mels")?,
            fmin: f64::from(mel[5]),
            fmax: f64::from(mel[6]),
            log_floor: 10f64.powf(f64::from(mel[7])),
        };
        mel.validate()
            .map_err(|e| bad(format!("config.mel: {e}")))?;
        let raw = &get(&blocks, "config.dims", 7)?.data;
        let dims = ModelDims {
            n_mels: as_usize(raw[0], "n_mels")?,
            speaker_dim: as_usize(raw[1], "speaker_dim")?,
            t_embed_dim: as_usize(raw[2], "t_embed_dim")?,
            style_dim: as_usize(raw[3], "style_dim")?,
            merge_hidden: as_usize(raw[4], "merge_hidden")?,
            decoder_hidden: as_usize(raw[5], "decoder_hidden")?,
            kernel: as_usize(raw[6], "kernel")?,
        };
        if dims.n_mels != mel.n_mels || dims.kernel.is_multiple_of(2) {
            return Err(bad("model dims inconsistent with mel config"));
        }
        let s = &get(&blocks, "config.schedule", 3)?.data;
        let schedule = super::make_schedule(
            as_usize(s[0], "n_steps")?,
            f64::from(s[1]),
            f64::from(s[2]),
        )?;
        let mut params = DecoderParams::zeros(dims);
        let expected_dims: Vec<Vec<usize>> = params.blocks().into_iter().map(|b| b.1).collect();
        for ((name, target), want) in params.blocks_mut().into_iter().zip(expected_dims) {
            let block = get(&blocks, name, target.len())?;
            if block.dims != want {
                return Err(bad(format!(
                    "block {name} has dims {:?}, expected {want:?}",
                    block.dims
                )));
            }
            for (t, &v) in target.iter_mut().zip(&block.data) {
                *t = f64::from(v);
            }
        }
        let mean = get(&blocks, "norm.mean", dims.n_mels)?
            .data
            .iter()
            .map(|&v| f64::from(v))
            .collect();
        let scale = f64::from(get(&blocks, "norm.scale", 1)?.data[0]);
        let codebook = match blocks.get("units.codebook") {
            Some(block) if block.dims.len() == 2 => {
                let centroids = Matrix::from_vec(
                    block.dims[0],
                    block.dims[1],
                    block.data.iter().map(|&v| f64::from(v)).collect(),
                );
                Some(Codebook::new(centroids).map_err(|e| bad(format!("units.codebook: {e}")))?)
            }
            Some(_) => return Err(bad("units.codebook must be rank 2")),
            None => None,
        };
        let ckpt = Self {
            mel,
            schedule,
            params,
            norm: MelNorm { mean, scale },
            codebook,
        };
        if !ckpt.params.is_finite() || !(ckpt.norm.scale > 0.0) {
            return Err(bad("non-finite or invalid parameters"));
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DiffusionError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| DiffusionError::UnwritableFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DiffusionError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| DiffusionError::UnreadableFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_bytes(&bytes)
    }
}
