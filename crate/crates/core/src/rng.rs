//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! keyed by a fixed hash of (seed, purpose, indices), so a stream never depends
//! on how many values other streams consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Order-sensitive hash of a list of words.
pub fn hash_words(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x6A09_E667_F3BC_C908, |acc, &w| mix64(acc ^ mix64(w)))
}

/// Independent generator for the stream named by `words`.
pub fn stream(words: &[u64]) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut h = hash_words(words);
    for chunk in key.chunks_exact_mut(8) {
        h = mix64(h);
        chunk.copy_from_slice(&h.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
