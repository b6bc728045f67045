//! FTB feature files: `"FTB1"`, kind `u8` (0 matrix, 1 vector, 2 prosody
//! track), rows `u32`, cols `u32`, then `f32` little-endian row-major data.
//! A prosody track stores three `1 x T` blocks: log-F0, voicing as 0/1 and
//! log energy.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::matrix::Matrix;
use crate::prosody::{ProsodyError, ProsodyTrack};

pub const FTB_MAGIC: &[u8; 4] = b"FTB1";
const HEADER_LEN: usize = 13;

#[derive(Debug, Error)]
pub enum FtbError {
    #[error("UnreadableFile: {path}: {reason}")]
    UnreadableFile { path: PathBuf, reason: String },
    #[error("UnwritableFile: {path}: {reason}")]
    UnwritableFile { path: PathBuf, reason: String },
    #[error("BadFormat: {0}")]
    BadFormat(String),
    #[error("WrongKind: expected {expected:?}, found {found:?}")]
    WrongKind { expected: FtbKind, found: FtbKind },
    #[error(transparent)]
    Prosody(#[from] ProsodyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FtbKind {
    Matrix,
    Vector,
    Prosody,
}

impl FtbKind {
    fn code(self) -> u8 {
        match self {
            Self::Matrix => 0,
            Self::Vector => 1,
            Self::Prosody => 2,
        }
    }

    fn from_code(code: u8) -> Result<Self, FtbError> {
        match code {
            0 => Ok(Self::Matrix),
            1 => Ok(Self::Vector),
            2 => Ok(Self::Prosody),
            other => Err(FtbError::BadFormat(format!("unknown kind {other}"))),
        }
    }

    fn blocks(self) -> usize {
        if self == Self::Prosody {
            3
        } else {
            1
        }
    }
}

/// Decoded file: kind, shape and the payload widened to `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct FtbData {
    pub kind: FtbKind,
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

pub fn encode(kind: FtbKind, rows: usize, cols: usize, values: &[f64]) -> Vec<u8> {
    assert_eq!(values.len(), rows * cols * kind.blocks());
    let mut out = Vec::with_capacity(HEADER_LEN + values.len() * 4);
    out.extend(FTB_MAGIC);
    out.push(kind.code());
    out.extend((rows as u32).to_le_bytes());
    out.extend((cols as u32).to_le_bytes());
    for &v in values {
        out.extend((v as f32).to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<FtbData, FtbError> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != FTB_MAGIC {
        return Err(FtbError::BadFormat("missing FTB1 header".into()));
    }
    let kind = FtbKind::from_code(bytes[4])?;
    let rows = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes")) as usize;
    let cols = u32::from_le_bytes(bytes[9..13].try_into().expect("4 bytes")) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4 * kind.blocks()))
        .ok_or_else(|| FtbError::BadFormat("shape overflows".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(FtbError::BadFormat(format!(
            "payload has {} bytes, header implies {expected}",
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
        .collect();
    Ok(FtbData {
        kind,
        rows,
        cols,
        values,
    })
}

fn write(path: &Path, bytes: Vec<u8>) -> Result<(), FtbError> {
    std::fs::write(path, bytes).map_err(|e| FtbError::UnwritableFile {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn read(path: impl AsRef<Path>) -> Result<FtbData, FtbError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| FtbError::UnreadableFile {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    decode(&bytes)
}

fn expect(data: &FtbData, kind: FtbKind) -> Result<(), FtbError> {
    if data.kind != kind {
        return Err(FtbError::WrongKind {
            expected: kind,
            found: data.kind,
        });
    }
    Ok(())
}

pub fn write_matrix(path: impl AsRef<Path>, m: &Matrix) -> Result<(), FtbError> {
    write(path.as_ref(), encode(FtbKind::Matrix, m.rows(), m.cols(), m.as_slice()))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix, FtbError> {
    let data = read(path)?;
    expect(&data, FtbKind::Matrix)?;
    Ok(Matrix::from_vec(data.rows, data.cols, data.values))
}

/// Vectors are stored as a single row.
pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<(), FtbError> {
    write(path.as_ref(), encode(FtbKind::Vector, 1, v.len(), v))
}

/// Accepts both `1 x n` and `n x 1` vectors.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>, FtbError> {
    let data = read(path)?;
    expect(&data, FtbKind::Vector)?;
    if data.rows != 1 && data.cols != 1 {
        return Err(FtbError::BadFormat(format!(
            "vector file has shape {}x{}",
            data.rows, data.cols
        )));
    }
    Ok(data.values)
}

pub fn encode_prosody(track: &ProsodyTrack) -> Vec<u8> {
    let mut values = track.log_f0().to_vec();
    values.extend(track.voiced().iter().map(|&v| if v { 1.0 } else { 0.0 }));
    values.extend_from_slice(track.log_energy());
    encode(FtbKind::Prosody, 1, track.n_frames(), &values)
}

pub fn decode_prosody(data: &FtbData) -> Result<ProsodyTrack, FtbError> {
    expect(data, FtbKind::Prosody)?;
    let n = data.rows * data.cols;
    let log_f0 = data.values[..n].to_vec();
    let voiced = data.values[n..2 * n].iter().map(|&v| v != 0.0).collect();
    let log_energy = data.values[2 * n..].to_vec();
    Ok(ProsodyTrack::new(log_f0, voiced, log_energy)?)
}

pub fn write_prosody(path: impl AsRef<Path>, track: &ProsodyTrack) -> Result<(), FtbError> {
    write(path.as_ref(), encode_prosody(track))
}

pub fn read_prosody(path: impl AsRef<Path>) -> Result<ProsodyTrack, FtbError> {
    decode_prosody(&read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let bytes = encode(FtbKind::Matrix, 2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.5]);
        assert_eq!(&bytes[..4], b"FTB1");
        assert_eq!(bytes[4], 0);
        assert_eq!(&bytes[5..9], &2u32.to_le_bytes());
        assert_eq!(&bytes[9..13], &3u32.to_le_bytes());
        assert_eq!(bytes.len(), 13 + 24);
        assert_eq!(&bytes[33..37], &6.5f32.to_le_bytes());
        let back = decode(&bytes).unwrap();
        assert_eq!(back.values, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.5]);
    }

    #[test]
    fn prosody_round_trip() {
        let track = ProsodyTrack::from_f0_hz(&[0.0, 220.0, 110.0, 0.0], vec![-1.0, 0.5, 0.25, -23.0]).unwrap();
        let back = decode_prosody(&decode(&encode_prosody(&track)).unwrap()).unwrap();
        assert_eq!(back.voiced(), track.voiced());
        assert_eq!(back.log_f0()[0], 0.0);
        for (a, b) in back.log_f0().iter().zip(track.log_f0()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_payloads() {
        let mut bytes = encode(FtbKind::Vector, 1, 4, &[0.0; 4]);
        bytes.pop();
        assert!(matches!(decode(&bytes), Err(FtbError::BadFormat(_))));
        assert!(decode(b"FTB2\0\0\0\0\0\0\0\0\0").is_err());
        let matrix = decode(&encode(FtbKind::Matrix, 1, 1, &[0.0])).unwrap();
        assert!(matches!(
            decode_prosody(&matrix),
            Err(FtbError::WrongKind { .. })
        ));
    }
}
