//! Seeded, splittable random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream whose key
//! is derived from a user seed and a path of stream identifiers (for example
//! `[DATASET, column]`). Streams never depend on the order in which other
//! streams are consumed, so results are identical under parallel generation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

// Stream domains. Distinct domains keep unrelated consumers independent.
pub(crate) const DOMAIN_HIDDEN_SET: u64 = 0x5345_5453;
pub(crate) const DOMAIN_COLUMNS: u64 = 0x434f_4c53;
pub(crate) const DOMAIN_RESAMPLE: u64 = 0x5253_4d50;
pub(crate) const DOMAIN_PERMUTE: u64 = 0x5045_524d;
pub(crate) const DOMAIN_SOLVER: u64 = 0x534f_4c56;
pub(crate) const DOMAIN_ROUND: u64 = 0x524e_4453;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a seed with a path of identifiers into a new 64-bit seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &id| splitmix64(acc ^ splitmix64(id)))
}

/// A generator for the stream addressed by `(seed, path)`.
pub fn stream(seed: u64, path: &[u64]) -> Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, path))
}

/// A generator seeded directly from `seed`.
pub fn from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
