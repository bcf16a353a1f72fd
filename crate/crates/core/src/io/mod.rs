//! On-disk formats shared across the tool.

mod emb;
mod labels;
mod manifest;
mod scores;

pub use emb::{decode_embeddings, encode_embeddings, read_embeddings, write_embeddings, EMB_MAGIC};
pub use labels::{parse_labels, read_labels, write_labels};
pub use manifest::{format_manifest, parse_manifest, read_manifest, write_manifest};
pub use scores::{format_scores, parse_scores, read_scores, write_scores};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
