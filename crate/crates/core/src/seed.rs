//! Deterministic derivation of independent random streams.
//!
//! Every stochastic task (one resample, one bijection draw, one pair) gets its
//! own generator derived from a master seed and a path of task labels, so the
//! result of a run never depends on how tasks are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a label path into a child seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &label| {
        splitmix64(acc ^ splitmix64(label.wrapping_add(0x632B_E59B_D9B4_E019)))
    })
}

/// Generator for the task identified by `path` under `master`.
pub fn stream(master: u64, path: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, path))
}
