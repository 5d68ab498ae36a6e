//! Seeded random streams.
//!
//! Every stochastic step draws from a ChaCha8 stream whose seed is derived
//! from a master seed and a path of integer keys, so each stream depends on
//! its own coordinates only and never on how many other streams exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name recorded in run manifests.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.3, seed_from_u64)";
pub const SEED_DERIVATION: &str = "splitmix64 chain over (seed, keys...)";

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed hash of `(seed, keys...)`.
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(seed), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

pub fn stream(seed: u64, keys: &[u64]) -> Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, keys))
}
