//! Deterministic derivation of independent generator seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream that drives the raw decisions of an environment.
pub const ENV_STREAM: u64 = 1;
/// Random stream that drives the interventions of a shield.
pub const SHIELD_STREAM: u64 = 2;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replication `index`, stream `stream` under a master seed.
pub fn derive_seed(master: u64, index: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ index) ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

pub fn stream_rng(master: u64, index: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index, stream))
}
