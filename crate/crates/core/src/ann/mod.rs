//! Online approximate nearest-neighbor search.

mod brute;
mod distance;
mod hnsw;
mod snapshot;

pub use brute::{brute_force_knn, recall_at_k, KnnTarget};
pub use distance::{l2, l2_sq};
pub use hnsw::{HnswIndex, HnswParams, QueryStats};
pub use snapshot::{decode_snapshot, encode_snapshot, read_snapshot, write_snapshot, SNAPSHOT_MAGIC};
