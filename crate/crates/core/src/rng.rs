//! Seeded random streams.
//!
//! Every random consumer in the crate draws from a `ChaCha8Rng` (the
//! `rand_chacha` implementation of ChaCha with 8 rounds). Independent streams
//! are derived from the run seed plus a tuple of stream keys (a purpose tag,
//! an epoch, a sample id) by folding the keys through SplitMix64. The derived
//! 64-bit value seeds the generator via `SeedableRng::seed_from_u64`.
//!
//! Keying streams by sample id means per-sample work (augmentation, view
//! perturbation) produces the same draws regardless of processing order.
//! Changing either the generator or the mixing function changes every
//! output of the tool, so both are fixed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Purpose tags, one per independent consumer.
pub mod tag {
    pub const HNSW_LEVELS: u64 = 1;
    pub const SYNTH: u64 = 2;
    pub const SELECT: u64 = 3;
    pub const AUGMENT: u64 = 4;
    pub const VIEW: u64 = 5;
    pub const DRIFT: u64 = 6;
    pub const ADAPTER: u64 = 7;
    pub const CORRUPT: u64 = 8;
    pub const BENCH: u64 = 9;
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed for the stream identified by `keys` under `seed`.
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(seed), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

pub fn stream(seed: u64, keys: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, keys))
}
