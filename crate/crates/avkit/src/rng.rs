//! Deterministic random streams derived from a single seed.
//!
//! Stream splitting is counter-based: the ChaCha12 key embeds the user seed and a
//! three-part stream id directly (no hashing), so distinct ids give independent
//! streams by construction and the same (seed, id) always replays byte-identically.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

/// Stream domains; the first id component of every derived stream.
pub mod domain {
    pub const IDENTITY: u64 = 1;
    pub const SWEEP: u64 = 2;
    pub const BERNSTEIN: u64 = 3;
    pub const DYADIC_BOUND: u64 = 4;
    pub const PRODUCT: u64 = 5;
    pub const FAMILY: u64 = 6;
    pub const COUNTEREXAMPLE: u64 = 7;
}

/// Independent deterministic stream for (seed, id0, id1, id2).
pub fn stream(seed: u64, id0: u64, id1: u64, id2: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&id0.to_le_bytes());
    key[16..24].copy_from_slice(&id1.to_le_bytes());
    key[24..32].copy_from_slice(&id2.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

/// One standard normal draw.
pub fn normal(rng: &mut ChaCha12Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// One standard complex normal draw: (N + iN)/sqrt(2), unit variance.
pub fn complex_normal(rng: &mut ChaCha12Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `n` standard complex normal draws.
pub fn complex_normals(rng: &mut ChaCha12Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| complex_normal(rng)).collect()
}

/// Draw `count` distinct indices from 0..n (order of first appearance).
pub fn distinct_indices(rng: &mut ChaCha12Rng, n: usize, count: usize) -> Vec<usize> {
    use rand::Rng;
    assert!(count <= n);
    let mut picked = Vec::with_capacity(count);
    while picked.len() < count {
        let i = rng.gen_range(0..n);
        if !picked.contains(&i) {
            picked.push(i);
        }
    }
    picked
}
