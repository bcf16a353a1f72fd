//! `ADP1` adapter checkpoints: magic, `d` as u32 LE, then `W` row-major and
//! `b`, all float32 LE. Only square adapters are stored.

use std::path::Path;

use super::linear::LinearAdapter;
use crate::error::{Error, Result};
use crate::io::{read_bytes, write_file};

pub const ADAPTER_MAGIC: &[u8; 4] = b"ADP1";

pub fn encode_adapter(adapter: &LinearAdapter) -> Result<Vec<u8>> {
    let d = adapter.dim_in();
    if adapter.dim_out() != d {
        return Err(Error::DimensionMismatch { expected: d, got: adapter.dim_out() });
    }
    let mut out = Vec::with_capacity(8 + 4 * (d * d + d));
    out.extend_from_slice(ADAPTER_MAGIC);
    out.extend_from_slice(&(d as u32).to_le_bytes());
    for v in adapter.weight().iter().chain(adapter.bias()) {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn decode_adapter(bytes: &[u8]) -> Result<LinearAdapter> {
    if bytes.len() < 8 || &bytes[..4] != ADAPTER_MAGIC {
        return Err(Error::BadMagic { expected: "ADP1", found: bytes[..bytes.len().min(4)].to_vec() });
    }
    let d = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if d == 0 {
        return Err(Error::out_of_range("adapter dimension", "d must be positive"));
    }
    let expected = 8 + 4 * (d as u64 * d as u64 + d as u64);
    if (bytes.len() as u64) != expected {
        return Err(Error::Truncated { expected, found: bytes.len() as u64 });
    }
    let vals: Vec<f64> = bytes[8..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    let (w, b) = vals.split_at(d * d);
    LinearAdapter::new(d, d, w.to_vec(), b.to_vec())
}

pub fn write_adapter(path: &Path, adapter: &LinearAdapter) -> Result<()> {
    write_file(path, &encode_adapter(adapter)?)
}

pub fn read_adapter(path: &Path) -> Result<LinearAdapter> {
    decode_adapter(&read_bytes(path)?)
}
