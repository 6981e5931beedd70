//! Seed derivation.
//!
//! Every random stream in the crate is derived from one top-level seed, a
//! stage name and an index. The stage name is hashed with FNV-1a and mixed
//! with the seed and index through SplitMix64, so streams for different
//! stages (or different rows, samples, ...) never share a ChaCha key.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed for `stage`/`index` from a parent seed.
pub fn derive_seed(seed: u64, stage: &str, index: u64) -> u64 {
    let s = splitmix64(seed ^ fnv1a(stage.as_bytes()));
    splitmix64(s ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

pub fn rng_for(seed: u64, stage: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stage, index))
}
