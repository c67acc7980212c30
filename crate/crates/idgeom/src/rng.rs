use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Seed plus substream index for a counter-based generator.
///
/// Identical `(seed, stream)` pairs yield identical draws no matter how work
/// is scheduled across threads: every parallel task derives its own substream
/// up front instead of sharing a mutable generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Instantiate the generator for this (seed, stream) pair.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Derive the `index`-th substream. Substreams of distinct indices are
    /// independent; the derivation is pure so parallel callers agree on it.
    pub fn substream(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream: mix64(self.stream, index),
        }
    }
}

impl Default for RngSpec {
    fn default() -> Self {
        Self::new(0)
    }
}

/// splitmix64-style combiner; collisions between practical substream trees
/// are negligible at 64 bits.
fn mix64(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit FNV-1a over UTF-8 bytes. Used to key per-word-type
/// substreams; must not change across releases or perturbation outputs drift.
pub fn fnv1a64(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_spec_same_draws() {
        let spec = RngSpec::with_stream(42, 7);
        let a: Vec<u64> = spec.rng().random_iter().take(8).collect();
        let b: Vec<u64> = spec.rng().random_iter().take(8).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn substreams_differ() {
        let spec = RngSpec::new(42);
        let a: u64 = spec.substream(0).rng().random();
        let b: u64 = spec.substream(1).rng().random();
        assert_ne!(a, b);
    }

    #[test]
    fn substream_is_pure() {
        let spec = RngSpec::with_stream(1, 2);
        assert_eq!(spec.substream(9), spec.substream(9));
    }

    #[test]
    fn fnv_is_stable() {
        // Frozen reference value; a change here breaks seeded reproducibility.
        assert_eq!(fnv1a64(""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64("a"), 0xaf63_dc4c_8601_ec8c);
    }
}
