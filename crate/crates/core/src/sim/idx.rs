//! The IDX container: a big-endian magic (`0x0000_08TT_DD`, type byte and
//! dimension count), one big-endian `u32` per dimension, then the payload.
//! Only unsigned-byte payloads are accepted. Files may be gzip-compressed.

use flate2::read::GzDecoder;
use sha2::{Digest, Sha256};
use std::io::Read;
use std::path::Path;
use thiserror::Error;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Error)]
pub enum IdxError {
    #[error("bad IDX magic {0:#010x}")]
    BadMagic(u32),
    #[error("truncated IDX payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("IDX dimensions overflow")]
    DimensionOverflow,
    #[error("{found} unexpected bytes after the IDX payload")]
    TrailingBytes { found: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, IdxError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    /// `count · rows · cols` bytes, image-major then row-major.
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.rows * self.cols;
        &self.pixels[i * n..(i + 1) * n]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdxData {
    Images(IdxImages),
    Labels(Vec<u8>),
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(IdxError::TruncatedPayload {
            expected: at + 4,
            found: bytes.len(),
        })
}

fn header(bytes: &[u8], ndims: usize) -> Result<(Vec<usize>, &[u8])> {
    let dims = (0..ndims)
        .map(|i| be_u32(bytes, 4 + 4 * i).map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    let size = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or(IdxError::DimensionOverflow)?;
    let payload = &bytes[4 + 4 * ndims..];
    if payload.len() < size {
        return Err(IdxError::TruncatedPayload {
            expected: size,
            found: payload.len(),
        });
    }
    if payload.len() > size {
        return Err(IdxError::TrailingBytes {
            found: payload.len() - size,
        });
    }
    Ok((dims, payload))
}

/// Parses an uncompressed IDX buffer holding either images or labels.
pub fn parse_idx(bytes: &[u8]) -> Result<IdxData> {
    match be_u32(bytes, 0)? {
        IMAGES_MAGIC => {
            let (dims, payload) = header(bytes, 3)?;
            Ok(IdxData::Images(IdxImages {
                count: dims[0],
                rows: dims[1],
                cols: dims[2],
                pixels: payload.to_vec(),
            }))
        }
        LABELS_MAGIC => {
            let (_, payload) = header(bytes, 1)?;
            Ok(IdxData::Labels(payload.to_vec()))
        }
        other => Err(IdxError::BadMagic(other)),
    }
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    match parse_idx(bytes)? {
        IdxData::Images(im) => Ok(im),
        IdxData::Labels(_) => Err(IdxError::BadMagic(LABELS_MAGIC)),
    }
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    match parse_idx(bytes)? {
        IdxData::Labels(l) => Ok(l),
        IdxData::Images(_) => Err(IdxError::BadMagic(IMAGES_MAGIC)),
    }
}

/// Reads a file, transparently gunzipping it. Returns the decoded bytes and
/// the hex SHA-256 of the file as stored on disk.
pub fn read_file(path: &Path) -> Result<(Vec<u8>, String)> {
    let io = |source| IdxError::Io {
        path: path.display().to_string(),
        source,
    };
    let raw = std::fs::read(path).map_err(io)?;
    let digest = hex(&Sha256::digest(&raw));
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out).map_err(io)?;
        Ok((out, digest))
    } else {
        Ok((raw, digest))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Serialises images back to IDX.
pub fn encode_images(images: &IdxImages) -> Vec<u8> {
    let mut out = IMAGES_MAGIC.to_be_bytes().to_vec();
    for d in [images.count, images.rows, images.cols] {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = LABELS_MAGIC.to_be_bytes().to_vec();
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
