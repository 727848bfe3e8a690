//! Deterministic random streams.
//!
//! Every stream is a ChaCha8 keystream keyed by the master seed and selected
//! by a 64-bit stream id, so `(seed, purpose, index)` always maps to the same
//! sequence regardless of how replicates are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream purposes. Keeping them distinct means the weights of replicate `i`
/// never share randomness with the Gibbs samples drawn on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Weights = 1,
    Gibbs = 2,
    Chain = 3,
    Misc = 4,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the `index`-th sub-experiment derived from `master`.
pub fn derive_seed(master: u64, purpose: Purpose, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ (purpose as u64).rotate_left(56)).wrapping_add(index))
}

/// Generator for `(master, purpose, index)`.
pub fn stream(master: u64, purpose: Purpose, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(derive_seed(master, purpose, index));
    rng
}

/// Generator keyed directly by a seed (stream 0).
pub fn from_seed(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
