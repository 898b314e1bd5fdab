//! Seed derivation.
//!
//! Every random stream is derived from one master seed by hashing the master
//! with a sequence of labels through SplitMix64. A stream is identified by its
//! label path, e.g. `[TRAJECTORY]` for the user trajectory or
//! `[OPTIMIZER, variant_tag, step]` for the optimizer at one time step. The
//! resulting 64-bit value seeds a ChaCha8 generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub const TRAJECTORY: u64 = 0x7472_616a;
pub const OPTIMIZER: u64 = 0x6f70_7469;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive(master: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix64(master), |acc, &l| splitmix64(acc ^ splitmix64(l)))
}

pub fn rng(master: u64, labels: &[u64]) -> Rng {
    Rng::seed_from_u64(derive(master, labels))
}

/// Stable numeric tag for a string label.
pub fn tag(label: &str) -> u64 {
    label
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}
