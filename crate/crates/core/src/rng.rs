//! Seeded random streams.
//!
//! Every random quantity in the crate comes from a ChaCha20 stream
//! (`rand_chacha::ChaCha20Rng`) seeded from a 64-bit seed. Sub-seeds for
//! individual trials and cells are derived with the SplitMix64 finalizer,
//! which is a bijection on `u64`, so distinct `(trial, cell)` pairs under one
//! base seed never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type Rng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial` of cell `cell` under `base`.
///
/// Injective in `(trial, cell)` for indices below `2^32`.
pub fn derive_seed(base: u64, trial: u32, cell: u32) -> u64 {
    let packed = (u64::from(trial) << 32) | u64::from(cell);
    mix64(base ^ mix64(packed))
}
