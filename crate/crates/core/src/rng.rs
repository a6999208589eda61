//! Seeded randomness with named substreams.
//!
//! Every consumer derives its own generator from `(seed, name, index)`, so
//! instance generation and stream sampling stay independently reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type LabRng = ChaCha8Rng;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Generator for substream `name` of the master `seed`.
pub fn substream(seed: u64, name: &str) -> LabRng {
    substream_indexed(seed, name, 0)
}

pub fn substream_indexed(seed: u64, name: &str, index: u64) -> LabRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&fnv1a(name.as_bytes()).to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    key[24..32].copy_from_slice(&0x5354_524d_4c41_4221u64.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
