//! Dynamic data selection driven by feature-space density and image/text
//! consistency, with single-op augmentation of the selected samples.
//!
//! Each epoch the engine indexes the current feature vectors in an HNSW
//! graph, scores every sample by the mean distance to its nearest neighbors
//! (sparser is higher) times the cosine agreement between its image embedding
//! and its label's text embedding, keeps the best-scoring budget, and
//! augments what it kept.

pub mod adapter;
pub mod ann;
pub mod augment;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod rng;
pub mod scoring;
pub mod types;

pub use config::{parse_config, RunConfig};
pub use error::{Error, Result};
pub use types::{
    EmbeddingKind, EmbeddingTable, FeatureStore, LabelTable, SampleId, ScoreTable, SelectionEntry, SelectionManifest,
};
