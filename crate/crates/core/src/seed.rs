//! Child seeds derived from one master seed by fixed labels.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Pseudo-random generator used everywhere in the crate. ChaCha keeps
/// streams identical across platforms and crate upgrades.
pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and a label. FNV-1a over the label
/// bytes, then mixed with the master seed.
pub fn derive(master: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(master ^ splitmix64(h))
}

/// Derives a child seed from `master`, a label and an integer index.
pub fn derive_indexed(master: u64, label: &str, index: u64) -> u64 {
    splitmix64(derive(master, label) ^ splitmix64(index.wrapping_add(1)))
}

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

pub fn child_rng(master: u64, label: &str) -> Rng {
    rng(derive(master, label))
}
