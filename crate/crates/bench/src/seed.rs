//! Seed streams.
//!
//! Every random instance draws from its own ChaCha8 stream. The stream seed
//! is a SplitMix64 digest of the run seed followed by the words identifying
//! the instance (experiment tag, the three dimensions, trial index):
//!
//! ```text
//! h₀ = splitmix64(seed),   h_{j+1} = splitmix64(h_j ⊕ word_j)
//! ```
//!
//! Standard normals come from `rand_distr::StandardNormal` (ziggurat) applied
//! to that stream, integers from `Rng::random_range`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One step of SplitMix64.
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_seed(seed: u64, words: &[u64]) -> u64 {
    words.iter().fold(splitmix64(seed), |h, &w| splitmix64(h ^ w))
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
