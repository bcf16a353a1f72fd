//! Linear embedding adapters tuned with a symmetric InfoNCE objective.

mod adam;
mod checkpoint;
mod infonce;
mod linear;
mod train;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{decode_adapter, encode_adapter, read_adapter, write_adapter, ADAPTER_MAGIC};
pub use infonce::{infonce_gradients, infonce_loss, AdapterGrads, LinearGrad};
pub use linear::{LinearAdapter, Matrix};
pub use train::{train_adapters, AdapterTrainConfig, TrainedAdapters};
