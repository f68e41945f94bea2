//! Reproducible randomness.
//!
//! Every random decision draws from ChaCha8 seeded through
//! `rand_core::SeedableRng::seed_from_u64`. Sub-seeds are derived from one
//! top-level seed and a role string:
//!
//! ```text
//! derive_seed(seed, role) = u64::from_le_bytes(SHA-256(seed.to_le_bytes() || role)[0..8])
//! ```
//!
//! Shuffles are a plain Fisher-Yates pass from the back, picking
//! `j = uniform_index(rng, i + 1)`, where `uniform_index` is rejection sampling
//! on `next_u64`. Both are spelled out here rather than delegated to `rand`'s
//! slice helpers so the exact stream is stable across `rand` releases.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub fn derive_seed(seed: u64, role: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(role.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rng_for(seed: u64, role: &str) -> Rng {
    rng_from_seed(derive_seed(seed, role))
}

/// Uniform integer in `0..bound` without modulo bias. `bound` must be nonzero.
pub fn uniform_index(rng: &mut impl RngCore, bound: usize) -> usize {
    assert!(bound > 0, "uniform_index bound must be positive");
    let bound = bound as u64;
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return (x % bound) as usize;
        }
    }
}

pub fn shuffle<T>(rng: &mut impl RngCore, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = uniform_index(rng, i + 1);
        items.swap(i, j);
    }
}

/// Uniform draw in `[0, 1)` with 53 random bits.
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal draw (Box-Muller).
pub fn normal_f64(rng: &mut impl RngCore) -> f64 {
    let u1 = 1.0 - unit_f64(rng);
    let u2 = unit_f64(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
