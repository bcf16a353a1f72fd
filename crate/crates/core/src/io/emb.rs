//! EMB1 embedding files.
//!
//! ```text
//! "EMB1" | kind: u8 (0 = image, 1 = text) | n: u64 LE | d: u32 LE | n*d f32 LE, row-major
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{EmbeddingKind, EmbeddingTable};

pub const EMB_MAGIC: &[u8; 4] = b"EMB1";
const HEADER_LEN: usize = 4 + 1 + 8 + 4;

pub fn encode_embeddings(table: &EmbeddingTable) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + table.as_slice().len() * 4);
    out.extend_from_slice(EMB_MAGIC);
    out.push(table.kind.code());
    out.extend_from_slice(&(table.len() as u64).to_le_bytes());
    out.extend_from_slice(&(table.dim() as u32).to_le_bytes());
    for v in table.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_embeddings(bytes: &[u8]) -> Result<EmbeddingTable> {
    if bytes.len() < 4 || &bytes[..4] != EMB_MAGIC {
        return Err(Error::BadMagic { expected: "EMB1", found: bytes[..bytes.len().min(4)].to_vec() });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated { expected: HEADER_LEN as u64, found: bytes.len() as u64 });
    }
    let kind = EmbeddingKind::from_code(bytes[4])
        .ok_or_else(|| Error::Invalid(format!("unknown embedding kind byte {}", bytes[4])))?;
    let n = u64::from_le_bytes(bytes[5..13].try_into().unwrap());
    let d = u32::from_le_bytes(bytes[13..17].try_into().unwrap()) as usize;
    if d == 0 {
        return Err(Error::out_of_range("dimension", "EMB1 header declares d = 0"));
    }
    let payload = &bytes[HEADER_LEN..];
    let expected = n
        .checked_mul(d as u64)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| Error::Invalid("EMB1 header size overflows".into()))?;
    let found = payload.len() as u64;
    if found < expected {
        return Err(Error::Truncated { expected, found });
    }
    if found > expected {
        return Err(Error::DimensionMismatch {
            expected: (expected / 4) as usize,
            got: payload.len() / 4,
        });
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    EmbeddingTable::new(kind, d, data)
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingTable> {
    decode_embeddings(&super::read_bytes(path)?)
}

pub fn write_embeddings(table: &EmbeddingTable, path: &Path) -> Result<()> {
    super::write_file(path, &encode_embeddings(table))
}
