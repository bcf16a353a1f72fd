//! `HNS1` index snapshots, for inspecting a graph outside the process.
//!
//! ```text
//! "HNS1" | dim u32 | M u32 | ef_construction u32 | ef_search u32 | flags u8
//!        | seed u64 | inserted u64 | n u64 | entry u32 (u32::MAX = none)
//! per node: id u32 | level u8 | dim f32 | per layer 0..=level: count u32, count x slot u32
//! ```
//! All integers and floats little-endian.

use std::path::Path;

use super::hnsw::{HnswIndex, HnswParams};
use crate::error::{Error, Result};
use crate::types::SampleId;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"HNS1";

pub fn encode_snapshot(index: &HnswIndex) -> Vec<u8> {
    let p = index.raw_parts();
    let mut out = Vec::new();
    out.extend_from_slice(SNAPSHOT_MAGIC);
    for v in [p.dim, p.params.m, p.params.ef_construction, p.params.ef_search] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    let flags = u8::from(p.params.extend_candidates)
        | u8::from(p.params.keep_pruned) << 1
        | u8::from(p.params.rebuild_each_epoch) << 2;
    out.push(flags);
    out.extend_from_slice(&p.seed.to_le_bytes());
    out.extend_from_slice(&p.inserted.to_le_bytes());
    out.extend_from_slice(&(p.ids.len() as u64).to_le_bytes());
    out.extend_from_slice(&p.entry.unwrap_or(u32::MAX).to_le_bytes());
    for (slot, id) in p.ids.iter().enumerate() {
        out.extend_from_slice(&id.0.to_le_bytes());
        out.push(p.levels[slot]);
        for v in &p.vectors[slot * p.dim..(slot + 1) * p.dim] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for layer in &p.links[slot] {
            out.extend_from_slice(&(layer.len() as u32).to_le_bytes());
            for s in layer {
                out.extend_from_slice(&s.to_le_bytes());
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(Error::Truncated {
            expected: (self.pos + n) as u64,
            found: self.bytes.len() as u64,
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<HnswIndex> {
    if bytes.len() < 4 || &bytes[..4] != SNAPSHOT_MAGIC {
        return Err(Error::BadMagic { expected: "HNS1", found: bytes[..bytes.len().min(4)].to_vec() });
    }
    let mut r = Reader { bytes, pos: 4 };
    let dim = r.u32()? as usize;
    let m = r.u32()? as usize;
    let ef_construction = r.u32()? as usize;
    let ef_search = r.u32()? as usize;
    let flags = r.u8()?;
    let params = HnswParams {
        m,
        ef_construction,
        ef_search,
        extend_candidates: flags & 1 != 0,
        keep_pruned: flags & 2 != 0,
        rebuild_each_epoch: flags & 4 != 0,
    };
    let seed = r.u64()?;
    let inserted = r.u64()?;
    let n = r.u64()? as usize;
    let entry = match r.u32()? {
        u32::MAX => None,
        e => Some(e),
    };
    let mut ids = Vec::with_capacity(n.min(1 << 20));
    let mut levels = Vec::with_capacity(n.min(1 << 20));
    let mut vectors = Vec::new();
    let mut links = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        ids.push(SampleId(r.u32()?));
        let level = r.u8()?;
        levels.push(level);
        for _ in 0..dim {
            vectors.push(r.f32()?);
        }
        let mut layers = Vec::with_capacity(level as usize + 1);
        for _ in 0..=level {
            let count = r.u32()? as usize;
            let mut nbs = Vec::with_capacity(count.min(1024));
            for _ in 0..count {
                nbs.push(r.u32()?);
            }
            layers.push(nbs);
        }
        links.push(layers);
    }
    if r.pos != bytes.len() {
        return Err(Error::Invalid("trailing bytes after HNS1 snapshot".into()));
    }
    HnswIndex::from_raw_parts(params, dim, seed, inserted, vectors, ids, levels, links, entry)
}

pub fn write_snapshot(index: &HnswIndex, path: &Path) -> Result<()> {
    std::fs::write(path, encode_snapshot(index)).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<HnswIndex> {
    decode_snapshot(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}
