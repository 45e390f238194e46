//! Keyed random streams.
//!
//! Every random source in the crate is a ChaCha8 stream derived from a root
//! seed plus a list of 64-bit key words. The key words are folded with
//! SplitMix64 into a 256-bit ChaCha key, and the last fold selects the ChaCha
//! stream id. The derivation uses only integer arithmetic, so streams are
//! identical across platforms and easy to mirror in other languages.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Concrete generator used throughout the crate.
pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One SplitMix64 output step applied to `z`.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a root seed and key words.
pub fn mix(root: u64, key: &[u64]) -> u64 {
    key.iter()
        .fold(splitmix64(root), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

/// FNV-1a over a string, used to turn labels into key words.
pub fn label(s: &str) -> u64 {
    s.bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Independent stream for `(root, key)`.
pub fn stream(root: u64, key: &[u64]) -> StreamRng {
    let mut state = mix(root, key);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(splitmix64(state));
    rng
}
