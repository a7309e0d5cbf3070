//! Seed management.
//!
//! All randomness in the crate flows from a single master seed through
//! named substreams, so that reruns are bit-identical and parallel workers
//! never share an RNG. A substream is addressed by the master seed plus a
//! path of integers (round, config index, episode index, ...); the address
//! is mixed with SplitMix64 into a ChaCha8 seed.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derive a child seed from a master seed and a substream path.
pub fn child_seed(master: u64, path: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    for &p in path {
        h = splitmix64(h ^ p.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    }
    h
}

/// RNG for the substream addressed by `path` under `master`.
pub fn child_rng(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(child_seed(master, path))
}
