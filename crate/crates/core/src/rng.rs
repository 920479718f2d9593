//! Deterministic, counter-style random streams.
//!
//! Every random decision in this crate draws from a [`ChaCha8Rng`] keyed by
//! an explicit `(seed, tags...)` tuple; there is no global RNG state. Two
//! runs with the same seed produce identical streams regardless of worker
//! count, because each parallel task derives its own stream from its index.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain-separation tags so that different operations keyed by the same
/// user seed never share a stream.
pub mod tag {
    pub const MONTE_CARLO: u64 = 0x4d43_5f4e_4f52_4d00; // "MC_NORM"
    pub const BERNOULLI: u64 = 0x4245_524e_4f55_4c00; // "BERNOUL"
    pub const PROBE_RANDOM: u64 = 0x5052_4f42_455f_5200; // "PROBE_R"
    pub const ASCENT: u64 = 0x4153_4345_4e54_0000; // "ASCENT"
    pub const CAPWISE: u64 = 0x4341_5057_4953_4500; // "CAPWISE"
    pub const MOMENT: u64 = 0x4d4f_4d45_4e54_0000; // "MOMENT"
    pub const SMALLCAP: u64 = 0x534d_4341_5000_0000; // "SMCAP"
    pub const FAMILY: u64 = 0x4641_4d49_4c59_0000; // "FAMILY"
    pub const TRIAL: u64 = 0x5452_4941_4c00_0000; // "TRIAL"
    pub const GRID_SELECT: u64 = 0x4753_454c_0000_0000; // "GSEL"
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent ChaCha8 stream from `(seed, tags...)`.
///
/// The 256-bit key is expanded with splitmix64 so that nearby seeds or tags
/// do not produce correlated streams.
pub fn stream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut state = seed ^ 0x6c61_6d62_6461_6c61; // "lambdala"
    let mut mixed = splitmix64(&mut state);
    for &t in tags {
        state ^= t;
        mixed ^= splitmix64(&mut state);
    }
    let mut key = [0u8; 32];
    let mut s = mixed;
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
